// include/avsr/dnn.hpp

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

#ifndef AVSR_DNN_HPP
#define AVSR_DNN_HPP

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "avsr/io.hpp"
#include "avsr/matrix.hpp"
#include "avsr/network.hpp"
#include "avsr/rng.hpp"
#include "avsr/schedule.hpp"

namespace avsr {

// Deep bottleneck feedforward classifier: sigmoid hidden layers, softmax
// output, one deliberately narrow hidden layer whose activations become
// the reduced visual features once the layers above it are discarded.

constexpr double kCrossEntropyFloor = 1e-12;

struct DnnParams {
  std::vector<Matrix> weights;  // layer i: widths[i+1] x widths[i]
  std::vector<Matrix> biases;   // layer i: 1 x widths[i+1]
  int bottleneck_layer = -1;    // index into weights of the bottleneck affine

  int num_layers() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return weights.front().cols(); }
  int output_dim() const { return weights.back().rows(); }
  int bottleneck_dim() const { return weights[bottleneck_layer].rows(); }
};

// widths runs [input, hidden..., output]; the bottleneck is the narrowest
// hidden width, which must be unique.
inline DnnParams make_dnn(const std::vector<int> &widths) {
  if (widths.size() < 3)
    throw DataError("make_dnn: need at least one hidden layer");
  DnnParams dnn;
  for (size_t i = 0; i + 1 < widths.size(); ++i) {
    dnn.weights.emplace_back(widths[i + 1], widths[i]);
    dnn.biases.emplace_back(1, widths[i + 1]);
  }
  int narrowest = 1;  // hidden widths live at indices 1..n-2
  for (size_t i = 2; i + 1 < widths.size(); ++i)
    if (widths[i] < widths[narrowest]) narrowest = static_cast<int>(i);
  for (size_t i = 1; i + 1 < widths.size(); ++i)
    if (static_cast<int>(i) != narrowest && widths[i] == widths[narrowest])
      throw DataError("make_dnn: bottleneck width is not unique");
  dnn.bottleneck_layer = narrowest - 1;
  return dnn;
}

template <typename Dnn, typename F>
void for_each_dnn_block(Dnn &dnn, F &&f) {
  for (size_t i = 0; i < dnn.weights.size(); ++i) {
    const std::string base = "ff" + std::to_string(i);
    f(base + ".w", dnn.weights[i]);
    f(base + ".b", dnn.biases[i]);
  }
}

inline void init_uniform(DnnParams &dnn, Rng &rng, double range = 0.1) {
  for_each_dnn_block(dnn, [&](const std::string &, Matrix &m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-range, range);
  });
}

// Fan-scaled uniform init with the x4 sigmoid gain, zero biases.  Deep
// narrow sigmoid stacks stall around the class priors with a flat +-0.1
// init, so this is the default for the bottleneck network.
inline void init_glorot_sigmoid(DnnParams &dnn, Rng &rng) {
  for (size_t i = 0; i < dnn.weights.size(); ++i) {
    Matrix &w = dnn.weights[i];
    const double range = 4.0 * std::sqrt(6.0 / (w.rows() + w.cols()));
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-range, range);
    dnn.biases[i].set_zero();
  }
}

struct DnnCache {
  std::vector<Matrix> activations;  // activations[0] = input batch
};

// Batched forward pass over B frames; returns B x K posteriors.
inline Matrix dnn_forward(const DnnParams &dnn, const Matrix &batch,
                          DnnCache *cache = nullptr) {
  if (batch.cols() != dnn.input_dim())
    throw DataError("dnn_forward: input dim " + std::to_string(batch.cols()) +
                    " != expected " + std::to_string(dnn.input_dim()));
  if (cache != nullptr) {
    cache->activations.clear();
    cache->activations.push_back(batch);
  }
  Matrix a = batch;
  for (int l = 0; l < dnn.num_layers(); ++l) {
    Matrix z = matmul_nt(a, dnn.weights[l]);
    for (int r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      const auto b = dnn.biases[l].row(0);
      for (int c = 0; c < z.cols(); ++c) row[c] += b[c];
    }
    if (l + 1 < dnn.num_layers()) {
      for (int r = 0; r < z.rows(); ++r)
        for (int c = 0; c < z.cols(); ++c) z(r, c) = sigmoid(z(r, c));
    } else {
      for (int r = 0; r < z.rows(); ++r) softmax_row_inplace(z.row(r));
    }
    a = std::move(z);
    if (cache != nullptr) cache->activations.push_back(a);
  }
  return a;
}

// Gradient for the batch given d_logits = dLoss/d(pre-softmax logits).
inline DnnParams dnn_backward(const DnnParams &dnn, const DnnCache &cache,
                              const Matrix &d_logits) {
  if (cache.activations.size() != static_cast<size_t>(dnn.num_layers()) + 1)
    throw DataError("dnn_backward: cache does not match this network");
  DnnParams grad = dnn;
  for_each_dnn_block(grad, [](const std::string &, Matrix &m) { m.set_zero(); });
  Matrix delta = d_logits;  // gradient at layer pre-activation
  for (int l = dnn.num_layers() - 1; l >= 0; --l) {
    grad.weights[l] += matmul_tn(delta, cache.activations[l]);
    for (int r = 0; r < delta.rows(); ++r) {
      const auto row = delta.row(r);
      auto b = grad.biases[l].row(0);
      for (int c = 0; c < delta.cols(); ++c) b[c] += row[c];
    }
    if (l > 0) {
      Matrix d_act = matmul(delta, dnn.weights[l]);
      const Matrix &act = cache.activations[l];
      for (int r = 0; r < d_act.rows(); ++r)
        for (int c = 0; c < d_act.cols(); ++c)
          d_act(r, c) *= act(r, c) * (1.0 - act(r, c));
      delta = std::move(d_act);
    }
  }
  return grad;
}

inline void sgd_step(DnnParams &dnn, const DnnParams &grad,
                     double learning_rate) {
  for (size_t i = 0; i < dnn.weights.size(); ++i) {
    dnn.weights[i].axpy(-learning_rate, grad.weights[i]);
    dnn.biases[i].axpy(-learning_rate, grad.biases[i]);
  }
}

// Bottleneck activations per frame: the forward pass truncated after the
// bottleneck layer's sigmoid, layers above it discarded.
inline Matrix extract_bottleneck(const DnnParams &dnn, const Matrix &frames) {
  if (frames.cols() != dnn.input_dim())
    throw DataError("extract_bottleneck: input dim mismatch");
  Matrix a = frames;
  for (int l = 0; l <= dnn.bottleneck_layer; ++l) {
    Matrix z = matmul_nt(a, dnn.weights[l]);
    for (int r = 0; r < z.rows(); ++r) {
      auto row = z.row(r);
      const auto b = dnn.biases[l].row(0);
      for (int c = 0; c < z.cols(); ++c) row[c] = sigmoid(row[c] + b[c]);
    }
    a = std::move(z);
  }
  return a;
}

// Per-frame argmax of the acoustic posterior gram, ties to the lowest
// index.  These labels supervise the bottleneck network.
inline std::vector<int> generate_frame_labels(const NetworkParams &acoustic,
                                              const Matrix &audio_features) {
  const Matrix post = softmax_rows(network_forward(acoustic, audio_features));
  std::vector<int> labels(post.rows());
  for (int t = 0; t < post.rows(); ++t) {
    const auto row = post.row(t);
    int best = 0;
    for (int k = 1; k < post.cols(); ++k)
      if (row[k] > row[best]) best = k;
    labels[t] = best;
  }
  return labels;
}

// Frame-shuffled mini-batch SGD on cross-entropy with the shared newbob
// rate schedule.  Gradients are averaged over the mini-batch.
inline std::vector<EpochReport> train_cross_entropy(
    DnnParams &dnn, const Matrix &train_frames,
    const std::vector<int> &train_labels, const Matrix &cv_frames,
    const std::vector<int> &cv_labels, const TrainConfig &config) {
  config.validate();
  if (train_frames.rows() == 0) throw DataError("train_cross_entropy: no data");
  if (train_frames.rows() != static_cast<int>(train_labels.size()) ||
      cv_frames.rows() != static_cast<int>(cv_labels.size()))
    throw DataError("train_cross_entropy: frame/label count mismatch");

  Rng rng(config.seed);
  NewbobSchedule schedule(config.learning_rate, config.halving_threshold,
                          config.stop_threshold, config.min_epochs);
  std::vector<int> order(train_frames.rows());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    const double lr = schedule.rate();
    // full reshuffle each epoch
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
      std::swap(order[i], order[rng.uniform_int(i + 1)]);

    double loss_sum = 0.0;
    for (int start = 0; start < train_frames.rows();
         start += config.batch_size) {
      const int bsz =
          std::min(config.batch_size, train_frames.rows() - start);
      Matrix batch(bsz, train_frames.cols());
      std::vector<int> batch_labels(bsz);
      for (int i = 0; i < bsz; ++i) {
        const int src = order[start + i];
        for (int d = 0; d < train_frames.cols(); ++d)
          batch(i, d) = train_frames(src, d);
        batch_labels[i] = train_labels[src];
      }
      DnnCache cache;
      const Matrix post = dnn_forward(dnn, batch, &cache);
      Matrix d_logits = post;
      for (int i = 0; i < bsz; ++i) {
        loss_sum -= std::log(std::max(post(i, batch_labels[i]), kCrossEntropyFloor));
        d_logits(i, batch_labels[i]) -= 1.0;
      }
      d_logits *= 1.0 / bsz;
      const DnnParams grad = dnn_backward(dnn, cache, d_logits);
      sgd_step(dnn, grad, lr);
    }

    int hits = 0;
    if (cv_frames.rows() > 0) {
      const Matrix post = dnn_forward(dnn, cv_frames);
      for (int i = 0; i < post.rows(); ++i) {
        const auto row = post.row(i);
        int best = 0;
        for (int k = 1; k < post.cols(); ++k)
          if (row[k] > row[best]) best = k;
        if (best == cv_labels[i]) ++hits;
      }
    }
    const double cv_acc =
        cv_frames.rows() > 0 ? 100.0 * hits / cv_frames.rows() : 0.0;
    EpochReport report;
    report.epoch = epoch;
    report.train_loss = loss_sum / train_frames.rows();
    report.cv_accuracy = cv_acc;
    report.learning_rate = lr;
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - wall_start)
                         .count();
    reports.push_back(report);
    if (!schedule.advance(cv_acc)) break;
  }
  return reports;
}

inline NamedBlocks dnn_to_blocks(const DnnParams &dnn) {
  NamedBlocks blocks;
  for_each_dnn_block(dnn, [&](const std::string &name, const Matrix &m) {
    blocks.emplace_back(name, m);
  });
  return blocks;
}

inline DnnParams dnn_from_blocks(const NamedBlocks &blocks) {
  std::vector<int> widths;
  DnnParams dnn;
  for (size_t i = 0;; ++i) {
    const std::string base = "ff" + std::to_string(i);
    const Matrix *w = nullptr, *b = nullptr;
    for (const auto &[name, m] : blocks) {
      if (name == base + ".w") w = &m;
      if (name == base + ".b") b = &m;
    }
    if (w == nullptr) break;
    if (b == nullptr) throw DataError("dnn_from_blocks: missing bias " + base);
    if (i == 0) widths.push_back(w->cols());
    widths.push_back(w->rows());
    dnn.weights.push_back(*w);
    dnn.biases.push_back(*b);
  }
  if (dnn.weights.empty()) throw DataError("dnn_from_blocks: no layers");
  const DnnParams shape = make_dnn(widths);
  dnn.bottleneck_layer = shape.bottleneck_layer;
  return dnn;
}

inline void save_dnn(const std::filesystem::path &path, const DnnParams &dnn) {
  write_model_blocks(path, dnn_to_blocks(dnn));
}

inline DnnParams load_dnn(const std::filesystem::path &path) {
  return dnn_from_blocks(read_model_blocks(path));
}

}  // namespace avsr

#endif  // AVSR_DNN_HPP
