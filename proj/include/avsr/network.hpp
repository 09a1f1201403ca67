// include/avsr/network.hpp

// Copyright 2026  AVSR Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef AVSR_NETWORK_HPP
#define AVSR_NETWORK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "avsr/io.hpp"
#include "avsr/matrix.hpp"
#include "avsr/rng.hpp"

namespace avsr {

// Stacked bidirectional LSTM with a linear output layer.  Standard LSTM
// cells: sigmoid gates, tanh cell/output nonlinearity, no peepholes, zero
// initial states.  Gate blocks are ordered input, forget, cell, output.

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

enum class Direction { kForward, kBackward };

// One direction of one layer.  wx: 4H x D, wh: 4H x H, b: 1 x 4H.
struct LstmDirectionParams {
  Matrix wx;
  Matrix wh;
  Matrix b;

  int hidden() const { return wh.cols(); }
  int input_dim() const { return wx.cols(); }
};

struct LstmLayerParams {
  LstmDirectionParams fwd;
  LstmDirectionParams bwd;

  int hidden() const { return fwd.hidden(); }
  int input_dim() const { return fwd.input_dim(); }
  int output_dim() const { return 2 * hidden(); }
};

struct NetworkParams {
  std::vector<LstmLayerParams> layers;
  Matrix w_out;  // K x 2H
  Matrix b_out;  // 1 x K

  int input_dim() const { return layers.front().input_dim(); }
  int output_dim() const { return w_out.rows(); }
};

namespace detail {

inline LstmDirectionParams make_direction(int input_dim, int hidden) {
  LstmDirectionParams p;
  p.wx = Matrix(4 * hidden, input_dim);
  p.wh = Matrix(4 * hidden, hidden);
  p.b = Matrix(1, 4 * hidden);
  return p;
}

}  // namespace detail

inline NetworkParams make_network(int input_dim, int hidden, int num_layers,
                                  int output_dim) {
  if (num_layers < 1) throw DataError("make_network: need at least one layer");
  NetworkParams net;
  int in = input_dim;
  for (int l = 0; l < num_layers; ++l) {
    LstmLayerParams layer;
    layer.fwd = detail::make_direction(in, hidden);
    layer.bwd = detail::make_direction(in, hidden);
    net.layers.push_back(std::move(layer));
    in = 2 * hidden;
  }
  net.w_out = Matrix(output_dim, in);
  net.b_out = Matrix(1, output_dim);
  return net;
}

// Visits every parameter block in a fixed order shared by initialization,
// SGD, gradient clipping and checkpoints.
template <typename Net, typename F>
void for_each_block(Net &net, F &&f) {
  for (size_t l = 0; l < net.layers.size(); ++l) {
    auto &layer = net.layers[l];
    const std::string base = "layer" + std::to_string(l);
    f(base + ".f.wx", layer.fwd.wx);
    f(base + ".f.wh", layer.fwd.wh);
    f(base + ".f.b", layer.fwd.b);
    f(base + ".b.wx", layer.bwd.wx);
    f(base + ".b.wh", layer.bwd.wh);
    f(base + ".b.b", layer.bwd.b);
  }
  f("out.w", net.w_out);
  f("out.b", net.b_out);
}

inline void init_uniform(NetworkParams &net, Rng &rng, double range = 0.1) {
  for_each_block(net, [&](const std::string &, Matrix &m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-range, range);
  });
}

// Gradients mirror the parameter structure.
inline NetworkParams make_like(const NetworkParams &net) {
  NetworkParams g = net;
  for_each_block(g, [](const std::string &, Matrix &m) { m.set_zero(); });
  return g;
}

struct LstmDirectionCache {
  Matrix gates;   // T x 4H, activated i,f,g,o
  Matrix cell;    // T x H
  Matrix tanh_c;  // T x H
  Matrix h;       // T x H
};

struct LstmLayerCache {
  Matrix input;  // T x D
  LstmDirectionCache fwd, bwd;
};

struct NetworkCache {
  std::vector<LstmLayerCache> layers;
  Matrix top;     // T x 2H concatenated hidden states of the last layer
  Matrix logits;  // T x K
  const NetworkParams *params = nullptr;
};

namespace detail {

// Runs one direction over the whole sequence.  The forward direction
// consumes t = 0..T-1, the backward direction t = T-1..0; both start from
// zero hidden and cell states.
inline void lstm_direction_forward(const LstmDirectionParams &p,
                                   const Matrix &input, Direction dir,
                                   LstmDirectionCache *cache) {
  const int T = input.rows();
  const int H = p.hidden();
  if (input.cols() != p.input_dim())
    throw DataError("lstm_direction_forward: input dim " +
                    std::to_string(input.cols()) + " != expected " +
                    std::to_string(p.input_dim()));

  // Input contributions for all frames at once; the recurrent term is the
  // only sequential part.
  Matrix pre = matmul_nt(input, p.wx);  // T x 4H
  for (int t = 0; t < T; ++t) {
    auto row = pre.row(t);
    const auto bias = p.b.row(0);
    for (int j = 0; j < 4 * H; ++j) row[j] += bias[j];
  }

  cache->gates = Matrix(T, 4 * H);
  cache->cell = Matrix(T, H);
  cache->tanh_c = Matrix(T, H);
  cache->h = Matrix(T, H);

  const int t0 = dir == Direction::kForward ? 0 : T - 1;
  const int step = dir == Direction::kForward ? 1 : -1;
  std::vector<double> h_prev(H, 0.0), c_prev(H, 0.0);
  for (int idx = 0; idx < T; ++idx) {
    const int t = t0 + step * idx;
    auto pre_t = pre.row(t);
    if (idx > 0) add_matvec(p.wh, h_prev, pre_t);
    auto gates = cache->gates.row(t);
    for (int j = 0; j < H; ++j) {
      const double i_g = sigmoid(pre_t[j]);
      const double f_g = sigmoid(pre_t[H + j]);
      const double g_g = std::tanh(pre_t[2 * H + j]);
      const double o_g = sigmoid(pre_t[3 * H + j]);
      gates[j] = i_g;
      gates[H + j] = f_g;
      gates[2 * H + j] = g_g;
      gates[3 * H + j] = o_g;
      const double c = f_g * c_prev[j] + i_g * g_g;
      const double tc = std::tanh(c);
      cache->cell(t, j) = c;
      cache->tanh_c(t, j) = tc;
      cache->h(t, j) = o_g * tc;
    }
    for (int j = 0; j < H; ++j) {
      h_prev[j] = cache->h(t, j);
      c_prev[j] = cache->cell(t, j);
    }
  }
}

// Backpropagates one direction.  d_h is the loss gradient on this
// direction's hidden outputs; gradients accumulate into *grad and the
// gradient on the layer input accumulates into *d_input.
inline void lstm_direction_backward(const LstmDirectionParams &p,
                                    const Matrix &input, Direction dir,
                                    const LstmDirectionCache &cache,
                                    const Matrix &d_h,
                                    LstmDirectionParams *grad,
                                    Matrix *d_input) {
  const int T = input.rows();
  const int H = p.hidden();
  const int t0 = dir == Direction::kForward ? 0 : T - 1;
  const int step = dir == Direction::kForward ? 1 : -1;

  Matrix d_pre(T, 4 * H);
  std::vector<double> carry_h(H, 0.0), carry_c(H, 0.0), dh(H), dc(H);
  for (int idx = T - 1; idx >= 0; --idx) {
    const int t = t0 + step * idx;
    const auto gates = cache.gates.row(t);
    auto d_pre_t = d_pre.row(t);
    for (int j = 0; j < H; ++j) {
      dh[j] = d_h(t, j) + carry_h[j];
      const double o_g = gates[3 * H + j];
      const double tc = cache.tanh_c(t, j);
      dc[j] = dh[j] * o_g * (1.0 - tc * tc) + carry_c[j];
      const double d_o = dh[j] * tc;
      d_pre_t[3 * H + j] = d_o * o_g * (1.0 - o_g);
    }
    for (int j = 0; j < H; ++j) {
      const double i_g = gates[j];
      const double f_g = gates[H + j];
      const double g_g = gates[2 * H + j];
      const double c_prev = idx > 0 ? cache.cell(t - step, j) : 0.0;
      d_pre_t[j] = dc[j] * g_g * i_g * (1.0 - i_g);
      d_pre_t[H + j] = dc[j] * c_prev * f_g * (1.0 - f_g);
      d_pre_t[2 * H + j] = dc[j] * i_g * (1.0 - g_g * g_g);
      carry_c[j] = dc[j] * f_g;
    }
    std::fill(carry_h.begin(), carry_h.end(), 0.0);
    add_matvec_t(p.wh, d_pre_t, carry_h);
  }

  // Batch the weight updates: previous hidden states in processing order.
  Matrix h_prev(T, H);
  for (int idx = 1; idx < T; ++idx) {
    const int t = t0 + step * idx;
    for (int j = 0; j < H; ++j) h_prev(t, j) = cache.h(t - step, j);
  }
  grad->wx += matmul_tn(d_pre, input);
  grad->wh += matmul_tn(d_pre, h_prev);
  for (int t = 0; t < T; ++t) {
    const auto row = d_pre.row(t);
    auto b = grad->b.row(0);
    for (int j = 0; j < 4 * H; ++j) b[j] += row[j];
  }
  *d_input += matmul(d_pre, p.wx);
}

}  // namespace detail

// Full forward pass: stacked bidirectional layers, linear output.
// Returns per-frame logits; the cache feeds network_backward.
inline Matrix network_forward(const NetworkParams &net, const Matrix &input,
                              NetworkCache *cache) {
  const int T = input.rows();
  cache->layers.assign(net.layers.size(), {});
  cache->params = &net;
  Matrix x = input;
  for (size_t l = 0; l < net.layers.size(); ++l) {
    const auto &layer = net.layers[l];
    auto &lc = cache->layers[l];
    lc.input = x;
    detail::lstm_direction_forward(layer.fwd, lc.input, Direction::kForward,
                                   &lc.fwd);
    detail::lstm_direction_forward(layer.bwd, lc.input, Direction::kBackward,
                                   &lc.bwd);
    const int H = layer.hidden();
    Matrix concat(T, 2 * H);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < H; ++j) {
        concat(t, j) = lc.fwd.h(t, j);
        concat(t, H + j) = lc.bwd.h(t, j);
      }
    }
    x = std::move(concat);
  }
  cache->top = x;
  cache->logits = matmul_nt(cache->top, net.w_out);
  for (int t = 0; t < T; ++t) {
    auto row = cache->logits.row(t);
    const auto b = net.b_out.row(0);
    for (int k = 0; k < net.output_dim(); ++k) row[k] += b[k];
  }
  return cache->logits;
}

inline Matrix network_forward(const NetworkParams &net, const Matrix &input) {
  NetworkCache cache;
  return network_forward(net, input, &cache);
}

// Exact BPTT gradient of any scalar loss whose logit gradient is d_logits.
inline NetworkParams network_backward(const NetworkCache &cache,
                                      const Matrix &d_logits) {
  if (cache.params == nullptr)
    throw DataError("network_backward: cache not populated by a forward pass");
  const NetworkParams &net = *cache.params;
  if (d_logits.rows() != cache.logits.rows() ||
      d_logits.cols() != cache.logits.cols())
    throw DataError("network_backward: gradient shape mismatch");

  NetworkParams grad = make_like(net);
  grad.w_out += matmul_tn(d_logits, cache.top);
  for (int t = 0; t < d_logits.rows(); ++t) {
    const auto row = d_logits.row(t);
    auto b = grad.b_out.row(0);
    for (int k = 0; k < d_logits.cols(); ++k) b[k] += row[k];
  }

  Matrix d_concat = matmul(d_logits, net.w_out);  // T x 2H of last layer
  for (int l = static_cast<int>(net.layers.size()) - 1; l >= 0; --l) {
    const auto &layer = net.layers[l];
    const auto &lc = cache.layers[l];
    const int T = lc.input.rows();
    const int H = layer.hidden();
    Matrix d_hf(T, H), d_hb(T, H);
    for (int t = 0; t < T; ++t) {
      for (int j = 0; j < H; ++j) {
        d_hf(t, j) = d_concat(t, j);
        d_hb(t, j) = d_concat(t, H + j);
      }
    }
    Matrix d_input(T, layer.input_dim());
    detail::lstm_direction_backward(layer.fwd, lc.input, Direction::kForward,
                                    lc.fwd, d_hf, &grad.layers[l].fwd,
                                    &d_input);
    detail::lstm_direction_backward(layer.bwd, lc.input, Direction::kBackward,
                                    lc.bwd, d_hb, &grad.layers[l].bwd,
                                    &d_input);
    d_concat = std::move(d_input);
  }
  return grad;
}

// Global L2-norm gradient clipping.  Returns the pre-clip norm.
inline double clip_gradients(NetworkParams &grad, double max_norm) {
  double sq = 0.0;
  for_each_block(grad, [&](const std::string &, Matrix &m) {
    sq += m.sum_squares();
  });
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for_each_block(grad, [&](const std::string &, Matrix &m) { m *= scale; });
  }
  return norm;
}

// p <- p - lr * g for every block.
inline void sgd_step(NetworkParams &net, const NetworkParams &grad,
                     double learning_rate) {
  std::vector<const Matrix *> gblocks;
  for_each_block(grad, [&](const std::string &, const Matrix &m) {
    gblocks.push_back(&m);
  });
  size_t i = 0;
  for_each_block(net, [&](const std::string &, Matrix &m) {
    m.axpy(-learning_rate, *gblocks[i++]);
  });
}

inline NamedBlocks network_to_blocks(const NetworkParams &net) {
  NamedBlocks blocks;
  for_each_block(net, [&](const std::string &name, const Matrix &m) {
    blocks.emplace_back(name, m);
  });
  return blocks;
}

// Rebuilds a network from named checkpoint blocks.
inline NetworkParams network_from_blocks(const NamedBlocks &blocks) {
  NetworkParams net;
  int layer_count = 0;
  for (const auto &[name, m] : blocks)
    if (name.starts_with("layer") && name.ends_with(".f.wx")) ++layer_count;
  if (layer_count == 0)
    throw DataError("network_from_blocks: no LSTM layers found");
  net.layers.resize(layer_count);
  auto find = [&blocks](const std::string &name) -> const Matrix & {
    for (const auto &[n, m] : blocks)
      if (n == name) return m;
    throw DataError("network_from_blocks: missing block " + name);
  };
  for (int l = 0; l < layer_count; ++l) {
    const std::string base = "layer" + std::to_string(l);
    net.layers[l].fwd.wx = find(base + ".f.wx");
    net.layers[l].fwd.wh = find(base + ".f.wh");
    net.layers[l].fwd.b = find(base + ".f.b");
    net.layers[l].bwd.wx = find(base + ".b.wx");
    net.layers[l].bwd.wh = find(base + ".b.wh");
    net.layers[l].bwd.b = find(base + ".b.b");
  }
  net.w_out = find("out.w");
  net.b_out = find("out.b");
  return net;
}

inline void save_network(const std::filesystem::path &path,
                         const NetworkParams &net) {
  write_model_blocks(path, network_to_blocks(net));
}

inline NetworkParams load_network(const std::filesystem::path &path) {
  return network_from_blocks(read_model_blocks(path));
}

}  // namespace avsr

#endif  // AVSR_NETWORK_HPP
