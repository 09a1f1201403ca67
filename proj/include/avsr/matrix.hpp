// include/avsr/matrix.hpp

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

#ifndef AVSR_MATRIX_HPP
#define AVSR_MATRIX_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

#include "avsr/errors.hpp"

namespace avsr {

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Dense row-major matrix of doubles.  Deliberately minimal: the toolkit
// runs at desk scale and every consumer owns its loops.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<size_t>(rows) * cols, value) {
    if (rows < 0 || cols < 0) throw DataError("Matrix: negative dimension");
  }
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ == 0 ? 0 : static_cast<int>(rows.begin()->size());
    data_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto &r : rows) {
      if (static_cast<int>(r.size()) != cols_)
        throw DataError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  std::span<double> row(int r) { return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)}; }
  std::span<const double> row(int r) const { return {data_.data() + static_cast<size_t>(r) * cols_, static_cast<size_t>(cols_)}; }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void set_zero() { fill(0.0); }

  Matrix &operator+=(const Matrix &o) {
    check_same_shape(o, "operator+=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Matrix &operator-=(const Matrix &o) {
    check_same_shape(o, "operator-=");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Matrix &operator*=(double s) {
    for (auto &v : data_) v *= s;
    return *this;
  }

  // this += a * x
  Matrix &axpy(double a, const Matrix &x) {
    check_same_shape(x, "axpy");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
  }

  bool is_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double sum_squares() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

 private:
  void check_same_shape(const Matrix &o, const char *op) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      std::ostringstream err;
      err << "Matrix::" << op << ": shape mismatch " << rows_ << "x" << cols_
          << " vs " << o.rows_ << "x" << o.cols_;
      throw DataError(err.str());
    }
  }

  int rows_, cols_;
  std::vector<double> data_;
};

// c = a * b
inline Matrix matmul(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.rows()) {
    std::ostringstream err;
    err << "matmul: inner dimensions differ, " << a.rows() << "x" << a.cols()
        << " * " << b.rows() << "x" << b.cols();
    throw DataError(err.str());
  }
  Matrix c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    const double *arow = a.row(i).data();
    double *crow = c.row(i).data();
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double *brow = b.row(k).data();
      for (int j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// c = a * b^T, contraction over the column index of both operands.
inline Matrix matmul_nt(const Matrix &a, const Matrix &b) {
  if (a.cols() != b.cols()) {
    std::ostringstream err;
    err << "matmul_nt: inner dimensions differ, " << a.rows() << "x" << a.cols()
        << " * (" << b.rows() << "x" << b.cols() << ")^T";
    throw DataError(err.str());
  }
  Matrix c(a.rows(), b.rows());
  for (int i = 0; i < a.rows(); ++i) {
    const double *arow = a.row(i).data();
    for (int j = 0; j < b.rows(); ++j) {
      const double *brow = b.row(j).data();
      double s = 0.0;
      for (int k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      c(i, j) = s;
    }
  }
  return c;
}

// c = a^T * b, contraction over the row index of both operands.
inline Matrix matmul_tn(const Matrix &a, const Matrix &b) {
  if (a.rows() != b.rows()) {
    std::ostringstream err;
    err << "matmul_tn: inner dimensions differ, (" << a.rows() << "x"
        << a.cols() << ")^T * " << b.rows() << "x" << b.cols();
    throw DataError(err.str());
  }
  Matrix c(a.cols(), b.cols());
  for (int k = 0; k < a.rows(); ++k) {
    const double *arow = a.row(k).data();
    const double *brow = b.row(k).data();
    for (int i = 0; i < a.cols(); ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double *crow = c.row(i).data();
      for (int j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

// y += m * x for a row-major m and contiguous vectors.
inline void add_matvec(const Matrix &m, std::span<const double> x,
                       std::span<double> y) {
  if (static_cast<int>(x.size()) != m.cols() ||
      static_cast<int>(y.size()) != m.rows())
    throw DataError("add_matvec: dimension mismatch");
  for (int i = 0; i < m.rows(); ++i) {
    const double *mrow = m.row(i).data();
    double s = 0.0;
    for (int j = 0; j < m.cols(); ++j) s += mrow[j] * x[j];
    y[i] += s;
  }
}

// y += m^T * x.
inline void add_matvec_t(const Matrix &m, std::span<const double> x,
                         std::span<double> y) {
  if (static_cast<int>(x.size()) != m.rows() ||
      static_cast<int>(y.size()) != m.cols())
    throw DataError("add_matvec_t: dimension mismatch");
  for (int i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double *mrow = m.row(i).data();
    for (int j = 0; j < m.cols(); ++j) y[j] += xi * mrow[j];
  }
}

// In-place softmax with max subtraction.
inline void softmax_row_inplace(std::span<double> logits) {
  if (logits.empty()) throw DataError("softmax_row: empty input");
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (auto &v : logits) {
    v = std::exp(v - mx);
    z += v;
  }
  for (auto &v : logits) v /= z;
}

inline std::vector<double> softmax_row(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  softmax_row_inplace(out);
  return out;
}

// Row-wise softmax of a logit matrix.
inline Matrix softmax_rows(const Matrix &logits) {
  Matrix post = logits;
  for (int t = 0; t < post.rows(); ++t) softmax_row_inplace(post.row(t));
  return post;
}

// log(exp(a) + exp(b)) with -inf meaning probability zero.
inline double log_add(double a, double b) {
  if (a == kLogZero) return b;
  if (b == kLogZero) return a;
  return a > b ? a + std::log1p(std::exp(b - a))
               : b + std::log1p(std::exp(a - b));
}

inline double log_sum_exp(std::span<const double> values) {
  double mx = kLogZero;
  for (double v : values) mx = std::max(mx, v);
  if (mx == kLogZero) return kLogZero;
  double s = 0.0;
  for (double v : values) s += std::exp(v - mx);
  return mx + std::log(s);
}

}  // namespace avsr

#endif  // AVSR_MATRIX_HPP
