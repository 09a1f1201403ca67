// include/avsr/decode.hpp

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

#ifndef AVSR_DECODE_HPP
#define AVSR_DECODE_HPP

#include <algorithm>
#include <vector>

#include "avsr/alphabet.hpp"
#include "avsr/ctc.hpp"
#include "avsr/matrix.hpp"

namespace avsr {

struct DecodeResult {
  LabelSequence hypothesis;
  std::vector<int> alignment;  // per-frame argmax
  double score = 0.0;          // sum of selected score entries
};

// Greedy best-path decoding: per-frame argmax (ties to the lowest index),
// then the collapse map.
inline DecodeResult best_path_decode(const Matrix &scores) {
  if (scores.rows() < 1) throw DataError("best_path_decode: empty input");
  DecodeResult result;
  result.alignment.resize(scores.rows());
  for (int t = 0; t < scores.rows(); ++t) {
    const auto row = scores.row(t);
    int best = 0;
    for (int k = 1; k < scores.cols(); ++k)
      if (row[k] > row[best]) best = k;
    result.alignment[t] = best;
    result.score += row[best];
  }
  result.hypothesis = collapse(result.alignment);
  return result;
}

// Levenshtein distance with unit insert/delete/substitute costs.
inline int edit_distance(const LabelSequence &a, const LabelSequence &b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  std::vector<int> prev(m + 1), cur(m + 1);
  for (int j = 0; j <= m; ++j) prev[j] = j;
  for (int i = 1; i <= n; ++i) {
    cur[0] = i;
    for (int j = 1; j <= m; ++j) {
      const int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

// Character error rate in percent: total edit distance over total
// reference length.  Spaces count like any other character.
inline double cer(const std::vector<LabelSequence> &hypotheses,
                  const std::vector<LabelSequence> &references) {
  if (hypotheses.size() != references.size())
    throw DataError("cer: list length mismatch");
  long long edits = 0, ref_chars = 0;
  for (size_t i = 0; i < references.size(); ++i) {
    edits += edit_distance(hypotheses[i], references[i]);
    ref_chars += static_cast<long long>(references[i].size());
  }
  if (ref_chars == 0) throw DataError("cer: empty reference total");
  return 100.0 * static_cast<double>(edits) / static_cast<double>(ref_chars);
}

}  // namespace avsr

#endif  // AVSR_DECODE_HPP
