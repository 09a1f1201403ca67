// include/avsr/features.hpp

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

#ifndef AVSR_FEATURES_HPP
#define AVSR_FEATURES_HPP

#include <algorithm>
#include <cmath>

#include "avsr/matrix.hpp"

namespace avsr {

// Feature sequences are T x d matrices, one frame per row.

// Subtracts the per-dimension mean over the utterance.
inline Matrix mean_normalize(const Matrix &seq) {
  if (seq.rows() < 1) throw DataError("mean_normalize: empty sequence");
  std::vector<double> mean(seq.cols(), 0.0);
  for (int t = 0; t < seq.rows(); ++t) {
    const auto row = seq.row(t);
    for (int d = 0; d < seq.cols(); ++d) mean[d] += row[d];
  }
  for (auto &m : mean) m /= seq.rows();
  Matrix out(seq.rows(), seq.cols());
  for (int t = 0; t < seq.rows(); ++t)
    for (int d = 0; d < seq.cols(); ++d) out(t, d) = seq(t, d) - mean[d];
  return out;
}

namespace detail {

// Two-tap regression deltas: d_t = sum_n n*(x[t+n] - x[t-n]) / (2*sum_n n^2),
// n in {1,2}, with edge frames replicated.
inline Matrix regression_deltas(const Matrix &seq) {
  const int T = seq.rows(), D = seq.cols();
  const double denom = 2.0 * (1.0 + 4.0);
  Matrix out(T, D);
  auto clamp_t = [T](int t) { return std::clamp(t, 0, T - 1); };
  for (int t = 0; t < T; ++t) {
    for (int d = 0; d < D; ++d) {
      double acc = 0.0;
      for (int n = 1; n <= 2; ++n)
        acc += n * (seq(clamp_t(t + n), d) - seq(clamp_t(t - n), d));
      out(t, d) = acc / denom;
    }
  }
  return out;
}

}  // namespace detail

// Appends delta and delta-delta blocks: d dims in, 3d dims out.
inline Matrix append_deltas(const Matrix &seq) {
  if (seq.rows() < 1) throw DataError("append_deltas: empty sequence");
  const Matrix d1 = detail::regression_deltas(seq);
  const Matrix d2 = detail::regression_deltas(d1);
  Matrix out(seq.rows(), 3 * seq.cols());
  for (int t = 0; t < seq.rows(); ++t) {
    for (int d = 0; d < seq.cols(); ++d) {
      out(t, d) = seq(t, d);
      out(t, seq.cols() + d) = d1(t, d);
      out(t, 2 * seq.cols() + d) = d2(t, d);
    }
  }
  return out;
}

// Frame splicing with edge replication: output dim d*(left+right+1),
// blocks ordered x[t-left] .. x[t+right].
inline Matrix splice(const Matrix &seq, int left, int right) {
  if (left < 0 || right < 0) throw DataError("splice: negative context");
  const int T = seq.rows(), D = seq.cols();
  Matrix out(T, D * (left + right + 1));
  for (int t = 0; t < T; ++t) {
    int block = 0;
    for (int off = -left; off <= right; ++off, ++block) {
      const int src = std::clamp(t + off, 0, T - 1);
      for (int d = 0; d < D; ++d) out(t, block * D + d) = seq(src, d);
    }
  }
  return out;
}

// Mean power over all entries after removing the per-dimension mean.
inline double normalized_power(const Matrix &seq) {
  const Matrix zeroed = mean_normalize(seq);
  return zeroed.sum_squares() / static_cast<double>(zeroed.size());
}

// clean + alpha * noise, with alpha chosen so the normalized powers sit at
// the requested SNR.  The noise sequence may be longer; its head is used.
inline Matrix mix_noise_at_snr(const Matrix &clean, const Matrix &noise,
                               double snr_db) {
  if (clean.cols() != noise.cols())
    throw DataError("mix_noise_at_snr: dimension mismatch");
  if (noise.rows() < clean.rows())
    throw DataError("mix_noise_at_snr: noise shorter than signal");
  Matrix used(clean.rows(), clean.cols());
  for (int t = 0; t < clean.rows(); ++t)
    for (int d = 0; d < clean.cols(); ++d) used(t, d) = noise(t, d);
  const double p_clean = normalized_power(clean);
  const double p_noise = normalized_power(used);
  if (p_noise <= 0.0)
    throw DataError("mix_noise_at_snr: noise has zero power");
  const double alpha =
      std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  Matrix out = clean;
  for (int t = 0; t < out.rows(); ++t)
    for (int d = 0; d < out.cols(); ++d) out(t, d) += alpha * used(t, d);
  return out;
}

}  // namespace avsr

#endif  // AVSR_FEATURES_HPP
