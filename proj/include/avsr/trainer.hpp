// include/avsr/trainer.hpp

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

#ifndef AVSR_TRAINER_HPP
#define AVSR_TRAINER_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "avsr/ctc.hpp"
#include "avsr/matrix.hpp"
#include "avsr/network.hpp"
#include "avsr/rng.hpp"
#include "avsr/schedule.hpp"

namespace avsr {

// Sequence-level CTC training with per-utterance SGD and the newbob rate
// schedule.  The fusion stage additionally drops one modality per extra
// presentation so the model never learns to lean on audio alone.

struct SequenceExample {
  std::string id;
  Matrix features;
  LabelSequence label;
};

namespace detail {

inline void shuffle_indices(std::vector<int> &order, Rng &rng) {
  for (int i = static_cast<int>(order.size()) - 1; i > 0; --i)
    std::swap(order[i], order[rng.uniform_int(i + 1)]);
}

// Fraction of frames whose argmax posterior matches the best constrained
// alignment of the reference, in percent.
inline double cv_frame_accuracy(const NetworkParams &net,
                                const std::vector<SequenceExample> &cv) {
  long long hits = 0, frames = 0;
  for (const auto &ex : cv) {
    const Matrix post = softmax_rows(network_forward(net, ex.features));
    std::vector<int> reference;
    try {
      reference = best_reference_alignment(post, ex.label);
    } catch (const InfeasibleSequenceError &) {
      continue;
    }
    for (int t = 0; t < post.rows(); ++t) {
      const auto row = post.row(t);
      int best = 0;
      for (int k = 1; k < post.cols(); ++k)
        if (row[k] > row[best]) best = k;
      hits += best == reference[t];
    }
    frames += post.rows();
  }
  return frames > 0 ? 100.0 * static_cast<double>(hits) / frames : 0.0;
}

// One CTC gradient step on one sequence.  Returns -log P or nullopt for
// an infeasible utterance (skipped with a warning).
inline std::optional<double> ctc_step(NetworkParams &net, const Matrix &features,
                                      const LabelSequence &label,
                                      const std::string &id, double lr,
                                      double clip_norm) {
  NetworkCache cache;
  const Matrix logits = network_forward(net, features, &cache);
  const Matrix post = softmax_rows(logits);
  CtcCache ctc_cache;
  double log_p;
  try {
    log_p = ctc_log_likelihood(post, label, &ctc_cache);
  } catch (const InfeasibleSequenceError &e) {
    std::cerr << "warning: skipping infeasible utterance " << id << ": "
              << e.what() << "\n";
    return std::nullopt;
  }
  const Matrix d_logits = ctc_gradient(post, label, ctc_cache);
  NetworkParams grad = network_backward(cache, d_logits);
  clip_gradients(grad, clip_norm);
  sgd_step(net, grad, lr);
  return -log_p;
}

}  // namespace detail

// Trains one CTC stage to the schedule's natural stop.  Shuffled
// utterance order and all updates are deterministic in config.seed.
inline std::vector<EpochReport> train_ctc_stage(
    NetworkParams &net, const std::vector<SequenceExample> &train,
    const std::vector<SequenceExample> &cv, const TrainConfig &config) {
  config.validate();
  if (train.empty()) throw DataError("train_ctc_stage: empty training set");

  Rng rng(config.seed);
  NewbobSchedule schedule(config.learning_rate, config.halving_threshold,
                          config.stop_threshold, config.min_epochs);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    const double lr = schedule.rate();
    detail::shuffle_indices(order, rng);
    double loss_sum = 0.0;
    long long frames = 0;
    for (int idx : order) {
      const auto &ex = train[idx];
      const auto loss = detail::ctc_step(net, ex.features, ex.label, ex.id, lr,
                                         config.clip_norm);
      if (loss) {
        loss_sum += *loss;
        frames += ex.features.rows();
      }
    }
    const double cv_acc = detail::cv_frame_accuracy(net, cv);
    EpochReport report;
    report.epoch = epoch;
    report.train_loss = frames > 0 ? loss_sum / frames : 0.0;
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

// Replaces one block of columns with the fill value, turning a modality off.
inline Matrix mask_columns(const Matrix &features, int begin, int end,
                           double fill_value) {
  if (begin < 0 || end > features.cols() || begin > end)
    throw DataError("mask_columns: bad column range");
  Matrix out = features;
  for (int t = 0; t < out.rows(); ++t)
    for (int d = begin; d < end; ++d) out(t, d) = fill_value;
  return out;
}

// Fusion-stage training on concatenated [audio, video] features.  Each
// epoch presents every utterance twice, AV first and then with the audio
// block filled, so one epoch makes 2N presentations.  After the schedule
// stops, two finishing epochs run audio-only (video block filled).
inline std::vector<EpochReport> train_fusion_stage(
    NetworkParams &net, const std::vector<SequenceExample> &train,
    const std::vector<SequenceExample> &cv, int audio_block_dim,
    const TrainConfig &config) {
  config.validate();
  if (train.empty()) throw DataError("train_fusion_stage: empty training set");
  const int total_dim = train.front().features.cols();
  if (audio_block_dim <= 0 || audio_block_dim >= total_dim)
    throw DataError("train_fusion_stage: audio block does not split features");

  Rng rng(config.seed);
  NewbobSchedule schedule(config.learning_rate, config.halving_threshold,
                          config.stop_threshold, config.min_epochs);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<EpochReport> reports;
  double final_lr = config.learning_rate;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto wall_start = std::chrono::steady_clock::now();
    const double lr = schedule.rate();
    final_lr = lr;
    detail::shuffle_indices(order, rng);
    double loss_sum = 0.0;
    long long frames = 0;
    for (int idx : order) {
      const auto &ex = train[idx];
      const auto av_loss = detail::ctc_step(net, ex.features, ex.label, ex.id,
                                            lr, config.clip_norm);
      const Matrix video_only =
          mask_columns(ex.features, 0, audio_block_dim, config.fill_value);
      const auto v_loss = detail::ctc_step(net, video_only, ex.label, ex.id,
                                           lr, config.clip_norm);
      if (av_loss && v_loss) {
        loss_sum += *av_loss + *v_loss;
        frames += 2 * ex.features.rows();
      }
    }
    const double cv_acc = detail::cv_frame_accuracy(net, cv);
    EpochReport report;
    report.epoch = epoch;
    report.train_loss = frames > 0 ? loss_sum / frames : 0.0;
    report.cv_accuracy = cv_acc;
    report.learning_rate = lr;
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - wall_start)
                         .count();
    reports.push_back(report);
    if (!schedule.advance(cv_acc)) break;
  }

  // Finishing phase: exactly two audio-only epochs.
  for (int extra = 0; extra < 2; ++extra) {
    const auto wall_start = std::chrono::steady_clock::now();
    detail::shuffle_indices(order, rng);
    double loss_sum = 0.0;
    long long frames = 0;
    for (int idx : order) {
      const auto &ex = train[idx];
      const Matrix audio_only = mask_columns(ex.features, audio_block_dim,
                                             total_dim, config.fill_value);
      const auto loss = detail::ctc_step(net, audio_only, ex.label, ex.id,
                                         final_lr, config.clip_norm);
      if (loss) {
        loss_sum += *loss;
        frames += ex.features.rows();
      }
    }
    EpochReport report;
    report.epoch = static_cast<int>(reports.size()) + 1;
    report.train_loss = frames > 0 ? loss_sum / frames : 0.0;
    report.cv_accuracy = detail::cv_frame_accuracy(net, cv);
    report.learning_rate = final_lr;
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - wall_start)
                         .count();
    reports.push_back(report);
  }
  return reports;
}

// Training log: one line per epoch, epoch\tloss\tcv_acc\tlr\tseconds.
inline void write_training_log(const std::filesystem::path &path,
                               const std::vector<EpochReport> &reports) {
  std::ofstream os(path);
  if (!os) throw DataError("write_training_log: cannot write " + path.string());
  char line[160];
  for (const auto &r : reports) {
    std::snprintf(line, sizeof(line), "%d\t%.6f\t%.4f\t%.8g\t%.3f\n", r.epoch,
                  r.train_loss, r.cv_accuracy, r.learning_rate, r.seconds);
    os << line;
  }
}

}  // namespace avsr

#endif  // AVSR_TRAINER_HPP
