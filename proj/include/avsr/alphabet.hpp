// include/avsr/alphabet.hpp

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

#ifndef AVSR_ALPHABET_HPP
#define AVSR_ALPHABET_HPP

#include <string>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

// A label sequence over the character set (no blanks).
using LabelSequence = std::vector<int>;

// Character inventory: 26 letters plus space, with one reserved blank.
// Index 0 is the blank everywhere in the toolkit, including on disk.
namespace alphabet {

constexpr int kBlank = 0;
constexpr int kNumChars = 27;           // A-Z and space
constexpr int kNumClasses = 28;         // characters + blank
constexpr int kSpace = 27;

inline int index_of(char c) {
  if (c >= 'A' && c <= 'Z') return 1 + (c - 'A');
  if (c >= 'a' && c <= 'z') return 1 + (c - 'a');
  if (c == ' ') return kSpace;
  throw DataError(std::string("alphabet: unsupported character '") + c + "'");
}

inline char char_of(int index) {
  if (index >= 1 && index <= 26) return static_cast<char>('A' + index - 1);
  if (index == kSpace) return ' ';
  throw DataError("alphabet: index " + std::to_string(index) +
                  " is not a character");
}

inline LabelSequence encode(const std::string &text) {
  LabelSequence seq;
  seq.reserve(text.size());
  for (char c : text) seq.push_back(index_of(c));
  return seq;
}

inline std::string decode(const LabelSequence &seq) {
  std::string text;
  text.reserve(seq.size());
  for (int i : seq) text.push_back(char_of(i));
  return text;
}

}  // namespace alphabet

}  // namespace avsr

#endif  // AVSR_ALPHABET_HPP
