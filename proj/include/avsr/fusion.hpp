// include/avsr/fusion.hpp

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

#ifndef AVSR_FUSION_HPP
#define AVSR_FUSION_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "avsr/decode.hpp"
#include "avsr/matrix.hpp"

namespace avsr {

// Stream combination: per-frame feature concatenation for the fused model,
// and log-posterior mixing with a KL-adaptive stream weight for the
// decision-fused pair.

constexpr double kProbFloor = 1e-12;  // applied before every log
constexpr double kPriorFloor = 1e-8;

// Per-frame concatenation [audio_t, video_t].
inline Matrix concat_features(const Matrix &audio, const Matrix &video) {
  if (audio.rows() != video.rows())
    throw DataError("concat_features: length mismatch");
  Matrix out(audio.rows(), audio.cols() + video.cols());
  for (int t = 0; t < audio.rows(); ++t) {
    for (int d = 0; d < audio.cols(); ++d) out(t, d) = audio(t, d);
    for (int d = 0; d < video.cols(); ++d) out(t, audio.cols() + d) = video(t, d);
  }
  return out;
}

// Class priors as relative frame-label frequencies, floored and
// renormalized so every log prior is finite.
struct ClassPriors {
  std::vector<double> probs;
  double floor = kPriorFloor;
};

inline ClassPriors estimate_priors(
    const std::vector<std::vector<int>> &frame_label_sets, int num_classes) {
  std::vector<long long> counts(num_classes, 0);
  long long total = 0;
  for (const auto &labels : frame_label_sets) {
    for (int v : labels) {
      if (v < 0 || v >= num_classes)
        throw DataError("estimate_priors: label out of range");
      ++counts[v];
      ++total;
    }
  }
  if (total == 0) throw DataError("estimate_priors: no frame labels");
  ClassPriors priors;
  priors.probs.resize(num_classes);
  double sum = 0.0;
  for (int k = 0; k < num_classes; ++k) {
    priors.probs[k] =
        std::max(static_cast<double>(counts[k]) / total, priors.floor);
    sum += priors.probs[k];
  }
  for (auto &p : priors.probs) p /= sum;
  return priors;
}

// log P(O|k) up to a constant: log posterior minus log prior.
inline Matrix pseudo_log_likelihood(const Matrix &post,
                                    const ClassPriors &priors) {
  if (post.cols() != static_cast<int>(priors.probs.size()))
    throw DataError("pseudo_log_likelihood: class count mismatch");
  Matrix scores(post.rows(), post.cols());
  for (int t = 0; t < post.rows(); ++t)
    for (int k = 0; k < post.cols(); ++k)
      scores(t, k) = std::log(std::max(post(t, k), kProbFloor)) -
                     std::log(priors.probs[k]);
  return scores;
}

// D(p_v || p_a) with the audio side floored; the video posteriors act as
// the reference distribution.
inline double kl_divergence(std::span<const double> p_v,
                            std::span<const double> p_a) {
  if (p_v.size() != p_a.size())
    throw DataError("kl_divergence: length mismatch");
  double d = 0.0;
  for (size_t k = 0; k < p_v.size(); ++k) {
    if (p_v[k] <= 0.0) continue;
    d += p_v[k] * (std::log(p_v[k]) - std::log(std::max(p_a[k], kProbFloor)));
  }
  return d;
}

// Per-utterance divergence: mean over frames.
inline double mean_kl_divergence(const Matrix &post_v, const Matrix &post_a) {
  if (post_v.rows() != post_a.rows())
    throw DataError("mean_kl_divergence: length mismatch");
  double d = 0.0;
  for (int t = 0; t < post_v.rows(); ++t)
    d += kl_divergence(post_v.row(t), post_a.row(t));
  return d / post_v.rows();
}

struct FusionConfig {
  double bias = 0.0;                   // sigmoid offset b
  std::optional<double> gamma_override;  // fixed stream weight when set
};

// gamma = 1 / (1 + exp(-d_kl + b)), the audio stream weight.
inline double gamma_from_kl(double d_kl, const FusionConfig &config) {
  if (config.gamma_override) {
    const double g = *config.gamma_override;
    if (g < 0.0 || g > 1.0)
      throw DataError("gamma_from_kl: override outside [0,1]");
    return g;
  }
  return 1.0 / (1.0 + std::exp(-d_kl + config.bias));
}

// score = gamma*log p_a + (1-gamma)*log p_v - log prior, per frame/class.
inline Matrix decision_fuse(const Matrix &post_a, const Matrix &post_v,
                            double gamma, const ClassPriors &priors) {
  if (post_a.rows() != post_v.rows())
    throw DataError("decision_fuse: length mismatch");
  if (post_a.cols() != post_v.cols() ||
      post_a.cols() != static_cast<int>(priors.probs.size()))
    throw DataError("decision_fuse: class count mismatch");
  if (gamma < 0.0 || gamma > 1.0)
    throw DataError("decision_fuse: gamma outside [0,1]");
  Matrix scores(post_a.rows(), post_a.cols());
  for (int t = 0; t < post_a.rows(); ++t) {
    for (int k = 0; k < post_a.cols(); ++k) {
      const double la = std::log(std::max(post_a(t, k), kProbFloor));
      const double lv = std::log(std::max(post_v(t, k), kProbFloor));
      scores(t, k) =
          gamma * la + (1.0 - gamma) * lv - std::log(priors.probs[k]);
    }
  }
  return scores;
}

// Decision fusion of one utterance with the KL-adapted weight.
inline Matrix decision_fuse_adaptive(const Matrix &post_a, const Matrix &post_v,
                                     const FusionConfig &config,
                                     const ClassPriors &priors,
                                     double *gamma_out = nullptr) {
  const double d_kl = mean_kl_divergence(post_v, post_a);
  const double gamma = gamma_from_kl(d_kl, config);
  if (gamma_out != nullptr) *gamma_out = gamma;
  return decision_fuse(post_a, post_v, gamma, priors);
}

// One validation utterance prepared for bias tuning: posteriors of both
// streams (the audio side under whatever conditions the caller chose) and
// the reference labels.
struct BiasTuneExample {
  Matrix post_a;
  Matrix post_v;
  LabelSequence reference;
};

// Grid search for the sigmoid offset minimizing fused CER over the given
// validation examples.  Ties go to the smallest b.
inline double tune_bias(const std::vector<BiasTuneExample> &validation,
                        const ClassPriors &priors,
                        const std::vector<double> &grid,
                        std::vector<double> *grid_cer = nullptr) {
  if (grid.empty()) throw DataError("tune_bias: empty bias grid");
  if (validation.empty()) throw DataError("tune_bias: empty validation set");
  double best_b = grid.front();
  double best_cer = std::numeric_limits<double>::infinity();
  for (double b : grid) {
    FusionConfig config;
    config.bias = b;
    std::vector<LabelSequence> hyps, refs;
    hyps.reserve(validation.size());
    refs.reserve(validation.size());
    for (const auto &ex : validation) {
      const Matrix scores =
          decision_fuse_adaptive(ex.post_a, ex.post_v, config, priors);
      hyps.push_back(best_path_decode(scores).hypothesis);
      refs.push_back(ex.reference);
    }
    const double c = cer(hyps, refs);
    if (grid_cer != nullptr) grid_cer->push_back(c);
    if (c < best_cer || (c == best_cer && b < best_b)) {
      best_cer = c;
      best_b = b;
    }
  }
  return best_b;
}

}  // namespace avsr

#endif  // AVSR_FUSION_HPP
