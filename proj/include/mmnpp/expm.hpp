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

#ifndef MMNPP_EXPM_HPP
#define MMNPP_EXPM_HPP

#include <cmath>
#include <cstddef>

#include "mmnpp/matrix.hpp"

namespace mmnpp {

/// Matrix exponential by the order-13 diagonal Padé approximant with
/// scaling and squaring. The scaling exponent s is chosen so that
/// ||A||_inf / 2^s <= 0.5, which keeps the approximant well inside its
/// accuracy region for the small generators handled here.
template <typename Real>
Mat<Real> expm(const Mat<Real>& a) {
  const std::size_t d = a.rows();
  if (a.cols() != d) throw Error(ErrorCode::dimension_mismatch, "expm needs a square matrix");
  if (!a.is_finite()) throw Error(ErrorCode::non_finite, "expm input");
  if (d == 1) {
    Mat<Real> r(1, 1);
    r(0, 0) = std::exp(a(0, 0));
    return r;
  }

  // Padé-13 numerator/denominator coefficients.
  static const double kB[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};

  const Real norm = a.inf_norm();
  int s = 0;
  if (norm > Real(0.5)) {
    s = static_cast<int>(std::ceil(std::log2(static_cast<double>(norm) / 0.5)));
    if (s < 0) s = 0;
  }
  Mat<Real> as = a * static_cast<Real>(std::ldexp(1.0, -s));

  const Mat<Real> id = Mat<Real>::identity(d);
  const Mat<Real> a2 = as * as;
  const Mat<Real> a4 = a2 * a2;
  const Mat<Real> a6 = a2 * a4;

  Mat<Real> u = a6 * (a6 * Real(kB[13]) + a4 * Real(kB[11]) + a2 * Real(kB[9]));
  u += a6 * Real(kB[7]) + a4 * Real(kB[5]) + a2 * Real(kB[3]) + id * Real(kB[1]);
  u = as * u;
  Mat<Real> v = a6 * (a6 * Real(kB[12]) + a4 * Real(kB[10]) + a2 * Real(kB[8]));
  v += a6 * Real(kB[6]) + a4 * Real(kB[4]) + a2 * Real(kB[2]) + id * Real(kB[0]);

  Mat<Real> p = v + u;
  Mat<Real> q = v - u;
  solve_in_place(q, p);  // p <- (V-U)^{-1} (V+U)

  for (int k = 0; k < s; ++k) p = p * p;
  return p;
}

template <typename Real>
struct VanLoanBlocks {
  Mat<Real> integral;    ///< upper-right block: integral of exp(A(t-s)) B exp(As) ds on [0,t]
  Mat<Real> propagator;  ///< upper-left block, equal to exp(A t)
};

/// Exponentiates the 2d x 2d block-triangular matrix [[A, B], [0, A]] * t and
/// returns its upper-left and upper-right d x d blocks. This is the cheap
/// entry point for callers that already hold exp(A t) and can verify the
/// propagator block themselves.
template <typename Real>
VanLoanBlocks<Real> van_loan_blocks(const Mat<Real>& a, const Mat<Real>& b, Real t) {
  const std::size_t d = a.rows();
  if (a.cols() != d || b.rows() != d || b.cols() != d)
    throw Error(ErrorCode::dimension_mismatch, "van_loan blocks need square A, B of equal size");
  if (!(t >= Real(0))) throw Error(ErrorCode::non_finite, "van_loan needs t >= 0");

  Mat<Real> block(2 * d, 2 * d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      block(i, j) = a(i, j) * t;
      block(i, d + j) = b(i, j) * t;
      block(d + i, d + j) = a(i, j) * t;
    }
  }
  const Mat<Real> e = expm(block);
  VanLoanBlocks<Real> out{Mat<Real>(d, d), Mat<Real>(d, d)};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      out.integral(i, j) = e(i, d + j);
      out.propagator(i, j) = e(i, j);
    }
  }
  if (!out.integral.is_finite()) throw Error(ErrorCode::non_finite, "van_loan result");
  return out;
}

/// Evaluates the integral of exp(A(t-s)) B exp(As) ds over [0, t] as the
/// upper-right block of expm([[A,B],[0,A]] t). The diagonal block is checked
/// against an independently computed exp(A t) within 1e-10 (relative to the
/// propagator scale) as an internal consistency guard.
template <typename Real>
Mat<Real> van_loan_integral(const Mat<Real>& a, const Mat<Real>& b, Real t) {
  VanLoanBlocks<Real> blocks = van_loan_blocks(a, b, t);
  const Mat<Real> eat = expm(a * t);
  const Real scale = std::max(Real(1), eat.max_abs());
  Mat<Real> diff = blocks.propagator - eat;
  if (!(diff.max_abs() <= Real(1e-10) * scale))
    throw Error(ErrorCode::non_finite, "van_loan propagator block deviates from expm(A t)");
  return blocks.integral;
}

}  // namespace mmnpp

#endif  // MMNPP_EXPM_HPP
