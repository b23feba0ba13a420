// Copyright 2026 The mmnpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMNPP_MATRIX_HPP
#define MMNPP_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "mmnpp/error.hpp"

namespace mmnpp {

/// Small dense row-major matrix. Sized for generators and Van Loan blocks
/// (dimension up to a few tens); not intended for large linear algebra.
template <typename Real = double>
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t d) {
    Mat m(d, d);
    for (std::size_t i = 0; i < d; ++i) m(i, i) = Real(1);
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  Real operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }

  Mat& operator+=(const Mat& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Mat& operator*=(Real s) {
    for (Real& v : data_) v *= s;
    return *this;
  }

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, Real s) { return a *= s; }
  friend Mat operator*(Real s, Mat a) { return a *= s; }

  friend Mat operator*(const Mat& a, const Mat& b) {
    Mat c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Real aik = a(i, k);
        if (aik == Real(0)) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    }
    return c;
  }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  /// Maximum absolute row sum.
  Real inf_norm() const {
    Real best(0);
    for (std::size_t i = 0; i < rows_; ++i) {
      Real s(0);
      for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
      if (s > best) best = s;
    }
    return best;
  }

  Real max_abs() const {
    Real best(0);
    for (Real v : data_)
      if (std::abs(v) > best) best = std::abs(v);
    return best;
  }

  bool is_finite() const {
    for (Real v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Real> data_;
};

using Matrix = Mat<double>;

/// Solves A X = B in place by Gaussian elimination with partial pivoting.
/// A is overwritten; B is overwritten with the solution.
template <typename Real>
void solve_in_place(Mat<Real>& a, Mat<Real>& b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.rows() != n)
    throw Error(ErrorCode::dimension_mismatch, "solve_in_place shape");
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    Real best = std::abs(a(col, col));
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::abs(a(i, col)) > best) {
        best = std::abs(a(i, col));
        piv = i;
      }
    }
    if (!(best > Real(0)))
      throw Error(ErrorCode::non_finite, "singular matrix in linear solve");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
      for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(col, j), b(piv, j));
    }
    const Real inv = Real(1) / a(col, col);
    for (std::size_t i = col + 1; i < n; ++i) {
      const Real f = a(i, col) * inv;
      if (f == Real(0)) continue;
      for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(col, j);
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(col, j);
    }
  }
  for (std::size_t col = n; col-- > 0;) {
    const Real inv = Real(1) / a(col, col);
    for (std::size_t j = 0; j < b.cols(); ++j) b(col, j) *= inv;
    for (std::size_t i = 0; i < col; ++i) {
      const Real f = a(i, col);
      if (f == Real(0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= f * b(col, j);
    }
  }
}

// Row-vector times matrix.
template <typename Real>
std::vector<Real> vec_mat(const std::vector<Real>& v, const Mat<Real>& m) {
  std::vector<Real> out(m.cols(), Real(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const Real vi = v[i];
    if (vi == Real(0)) continue;
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += vi * m(i, j);
  }
  return out;
}

// Matrix times column-vector.
template <typename Real>
std::vector<Real> mat_vec(const Mat<Real>& m, const std::vector<Real>& v) {
  std::vector<Real> out(m.rows(), Real(0));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Real s(0);
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

template <typename Real>
Real dot(const std::vector<Real>& a, const std::vector<Real>& b) {
  Real s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename Real>
Real vec_sum(const std::vector<Real>& v) {
  Real s(0);
  for (Real x : v) s += x;
  return s;
}

}  // namespace mmnpp

#endif  // MMNPP_MATRIX_HPP
