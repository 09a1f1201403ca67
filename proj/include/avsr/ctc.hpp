// include/avsr/ctc.hpp

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

#ifndef AVSR_CTC_HPP
#define AVSR_CTC_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "avsr/alphabet.hpp"
#include "avsr/matrix.hpp"

namespace avsr {

// Connectionist temporal classification over row-stochastic posterior
// grams (T x K, blank at index 0).  Every recursion runs in log space;
// there is no probability-space scaling anywhere.

// Collapse map: merge adjacent repeats, then delete blanks.
inline LabelSequence collapse(const std::vector<int> &alignment,
                              int blank = alphabet::kBlank) {
  LabelSequence out;
  int prev = -1;
  for (int s : alignment) {
    if (s != prev && s != blank) out.push_back(s);
    prev = s;
  }
  return out;
}

// Minimal alignment length: every symbol needs a frame, plus a separating
// blank between equal adjacent labels.
inline int min_alignment_length(const LabelSequence &label) {
  int n = static_cast<int>(label.size());
  for (size_t i = 1; i < label.size(); ++i)
    if (label[i] == label[i - 1]) ++n;
  return n;
}

struct CtcCache {
  Matrix log_post;   // T x K log posteriors
  Matrix alpha;      // T x R over the blank-augmented sequence
  Matrix beta;       // T x R, emission at t included
  LabelSequence label;
  std::vector<int> augmented;  // l' of length 2S+1
  double log_likelihood = kLogZero;
};

namespace detail {

inline std::vector<int> augment_with_blanks(const LabelSequence &label,
                                            int blank) {
  std::vector<int> aug(2 * label.size() + 1, blank);
  for (size_t i = 0; i < label.size(); ++i) aug[2 * i + 1] = label[i];
  return aug;
}

inline void check_instance(const Matrix &post, const LabelSequence &label) {
  const int T = post.rows();
  if (T < 1) throw DataError("ctc: empty posterior gram");
  for (int v : label) {
    if (v == alphabet::kBlank)
      throw DataError("ctc: label sequence contains the blank");
    if (v < 0 || v >= post.cols())
      throw DataError("ctc: label index " + std::to_string(v) +
                      " out of range for " + std::to_string(post.cols()) +
                      " classes");
  }
  const int need = min_alignment_length(label);
  if (T < need)
    throw InfeasibleSequenceError(
        "ctc: no alignment of length " + std::to_string(T) +
        " exists for a label sequence needing " + std::to_string(need) +
        " frames");
}

}  // namespace detail

// Exact log P(l|O) by the forward-backward recursions over the
// blank-augmented label sequence.  Throws InfeasibleSequenceError when the
// trellis is structurally empty (T too short), which is different from a
// -inf result caused by zero posteriors.
inline double ctc_log_likelihood(const Matrix &post, const LabelSequence &label,
                                 CtcCache *cache = nullptr) {
  detail::check_instance(post, label);
  const int T = post.rows();
  const int K = post.cols();
  const auto aug = detail::augment_with_blanks(label, alphabet::kBlank);
  const int R = static_cast<int>(aug.size());

  Matrix log_post(T, K);
  for (int t = 0; t < T; ++t)
    for (int k = 0; k < K; ++k)
      log_post(t, k) = post(t, k) > 0.0 ? std::log(post(t, k)) : kLogZero;

  auto allows_skip = [&aug](int r) {
    return aug[r] != alphabet::kBlank && r >= 2 && aug[r] != aug[r - 2];
  };

  Matrix alpha(T, R, kLogZero);
  alpha(0, 0) = log_post(0, aug[0]);
  if (R > 1) alpha(0, 1) = log_post(0, aug[1]);
  for (int t = 1; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      double acc = alpha(t - 1, r);
      if (r >= 1) acc = log_add(acc, alpha(t - 1, r - 1));
      if (allows_skip(r)) acc = log_add(acc, alpha(t - 1, r - 2));
      alpha(t, r) = acc + log_post(t, aug[r]);
    }
  }
  double log_p = alpha(T - 1, R - 1);
  if (R > 1) log_p = log_add(log_p, alpha(T - 1, R - 2));

  if (cache != nullptr) {
    Matrix beta(T, R, kLogZero);
    beta(T - 1, R - 1) = log_post(T - 1, aug[R - 1]);
    if (R > 1) beta(T - 1, R - 2) = log_post(T - 1, aug[R - 2]);
    for (int t = T - 2; t >= 0; --t) {
      for (int r = R - 1; r >= 0; --r) {
        double acc = beta(t + 1, r);
        if (r + 1 < R) acc = log_add(acc, beta(t + 1, r + 1));
        if (r + 2 < R && aug[r] != alphabet::kBlank && aug[r] != aug[r + 2])
          acc = log_add(acc, beta(t + 1, r + 2));
        beta(t, r) = acc + log_post(t, aug[r]);
      }
    }
    cache->log_post = std::move(log_post);
    cache->alpha = std::move(alpha);
    cache->beta = std::move(beta);
    cache->label = label;
    cache->augmented = aug;
    cache->log_likelihood = log_p;
  }
  return log_p;
}

// Gradient of -log P(l|O) with respect to the pre-softmax logits:
// post[t][k] minus the normalized trellis occupancy of symbol k at t.
inline Matrix ctc_gradient(const Matrix &post, const LabelSequence &label,
                           const CtcCache &cache) {
  const int T = post.rows();
  const int K = post.cols();
  const int R = static_cast<int>(cache.augmented.size());
  if (cache.alpha.rows() != T || cache.label != label ||
      cache.log_post.cols() != K)
    throw DataError("ctc_gradient: cache does not match this instance");
  if (cache.log_likelihood == kLogZero)
    throw DataError("ctc_gradient: zero-probability instance has no gradient");

  Matrix grad = post;
  for (int t = 0; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      const double a = cache.alpha(t, r);
      const double b = cache.beta(t, r);
      if (a == kLogZero || b == kLogZero) continue;
      const int k = cache.augmented[r];
      // alpha and beta both include the emission at t; divide once.
      const double occ =
          std::exp(a + b - cache.log_post(t, k) - cache.log_likelihood);
      grad(t, k) -= occ;
    }
  }
  return grad;
}

// Most probable single alignment constrained to the label sequence
// (max-product over the same trellis), as per-frame class indices.
inline std::vector<int> best_reference_alignment(const Matrix &post,
                                                 const LabelSequence &label) {
  detail::check_instance(post, label);
  const int T = post.rows();
  const auto aug = detail::augment_with_blanks(label, alphabet::kBlank);
  const int R = static_cast<int>(aug.size());

  Matrix score(T, R, kLogZero);
  std::vector<std::vector<int>> back(T, std::vector<int>(R, -1));
  auto lp = [&](int t, int r) {
    const double p = post(t, aug[r]);
    return p > 0.0 ? std::log(p) : kLogZero;
  };
  score(0, 0) = lp(0, 0);
  if (R > 1) score(0, 1) = lp(0, 1);
  for (int t = 1; t < T; ++t) {
    for (int r = 0; r < R; ++r) {
      double best = score(t - 1, r);
      int from = r;
      if (r >= 1 && score(t - 1, r - 1) > best) {
        best = score(t - 1, r - 1);
        from = r - 1;
      }
      if (r >= 2 && aug[r] != alphabet::kBlank && aug[r] != aug[r - 2] &&
          score(t - 1, r - 2) > best) {
        best = score(t - 1, r - 2);
        from = r - 2;
      }
      if (best == kLogZero) continue;
      score(t, r) = best + lp(t, r);
      back[t][r] = from;
    }
  }
  int r = R - 1;
  if (R > 1 && score(T - 1, R - 2) > score(T - 1, R - 1)) r = R - 2;
  if (score(T - 1, r) == kLogZero)
    throw DataError(
        "best_reference_alignment: every alignment has zero probability");
  std::vector<int> frames(T);
  for (int t = T - 1; t >= 0; --t) {
    frames[t] = aug[r];
    if (t > 0) r = back[t][r];
  }
  return frames;
}

// Direct enumeration over all K^T alignments, kept deliberately naive as
// the small-instance oracle for the forward-backward path.  An infeasible
// label simply has no matching alignment and comes back as -inf.
inline double brute_force_log_likelihood(const Matrix &post,
                                         const LabelSequence &label) {
  const int T = post.rows();
  const int K = post.cols();
  if (T < 1) throw DataError("ctc: empty posterior gram");
  double paths = 1.0;
  for (int t = 0; t < T; ++t) {
    paths *= K;
    if (paths > 1e7)
      throw DataError("brute_force_log_likelihood: instance too large");
  }
  std::vector<int> alignment(T, 0);
  double total = 0.0;
  while (true) {
    if (collapse(alignment) == label) {
      double p = 1.0;
      for (int t = 0; t < T; ++t) p *= post(t, alignment[t]);
      total += p;
    }
    int t = T - 1;
    while (t >= 0 && ++alignment[t] == K) alignment[t--] = 0;
    if (t < 0) break;
  }
  return total > 0.0 ? std::log(total) : kLogZero;
}

}  // namespace avsr

#endif  // AVSR_CTC_HPP
