// include/avsr/errors.hpp

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

#ifndef AVSR_ERRORS_HPP
#define AVSR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace avsr {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Bad command-line usage or invalid argument values.  CLI exit code 1.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string &msg) : Error(msg) {}
};

// A pipeline stage was requested before its prerequisite stage ran.
// CLI exit code 2.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string &msg) : Error(msg) {}
};

// Malformed files, dimension mismatches, unreadable/unwritable paths.
// CLI exit code 3.
class DataError : public Error {
 public:
  explicit DataError(const std::string &msg) : Error(msg) {}
};

// A label sequence has no valid alignment of the given length.
// Distinct from a -inf log-likelihood: the trellis itself is empty.
class InfeasibleSequenceError : public DataError {
 public:
  explicit InfeasibleSequenceError(const std::string &msg) : DataError(msg) {}
};

}  // namespace avsr

#endif  // AVSR_ERRORS_HPP
