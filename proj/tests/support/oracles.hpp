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
//
// Test-only oracles, kept independent of the implementation paths they check:
// matrix exponentials come from a truncated Taylor series, integrals from
// adaptive Simpson or Gauss-Legendre quadrature, and likelihoods from unscaled
// kernel products in extended precision.

#ifndef MMNPP_TESTS_SUPPORT_ORACLES_HPP
#define MMNPP_TESTS_SUPPORT_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "mmnpp/events.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/matrix.hpp"
#include "mmnpp/model.hpp"

namespace mmnpp::testing {

using LMat = Mat<long double>;
using LVec = std::vector<long double>;

inline LMat to_long(const Matrix& m) {
  LMat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

/// Truncated Taylor series exponential. With scale=true the argument is
/// pre-scaled below unit norm and re-squared, so the series stays accurate
/// for any norm; with scale=false this is the literal 60-term series.
inline LMat series_expm(const LMat& a, int terms = 60, bool scale = true) {
  const std::size_t d = a.rows();
  int s = 0;
  LMat as = a;
  if (scale) {
    long double norm = a.inf_norm();
    while (norm > 1.0L) {
      norm /= 2.0L;
      ++s;
    }
    as = a * static_cast<long double>(std::ldexp(1.0, -s));
  }
  LMat sum = LMat::identity(d);
  LMat term = LMat::identity(d);
  for (int k = 1; k <= terms; ++k) {
    term = term * as;
    term *= (1.0L / static_cast<long double>(k));
    sum += term;
  }
  for (int k = 0; k < s; ++k) sum = sum * sum;
  return sum;
}

/// Adaptive Simpson quadrature of a matrix-valued integrand, refined until
/// the max-abs difference between levels is below tol.
inline LMat adaptive_simpson(const std::function<LMat(long double)>& f, long double lo,
                             long double hi, long double tol, int max_depth = 24) {
  struct Impl {
    const std::function<LMat(long double)>& f;
    int max_depth;
    LMat recurse(long double a, long double b, const LMat& fa, const LMat& fm, const LMat& fb,
                 const LMat& whole, long double tol, int depth) {
      const long double m = 0.5L * (a + b);
      const long double lm = 0.5L * (a + m);
      const long double rm = 0.5L * (m + b);
      const LMat flm = f(lm);
      const LMat frm = f(rm);
      const LMat left = (fa + flm * 4.0L + fm) * ((m - a) / 6.0L);
      const LMat right = (fm + frm * 4.0L + fb) * ((b - m) / 6.0L);
      LMat diff = left + right - whole;
      if (depth >= max_depth || diff.max_abs() <= 15.0L * tol)
        return left + right + diff * (1.0L / 15.0L);
      return recurse(a, m, fa, flm, fm, left, tol / 2.0L, depth + 1) +
             recurse(m, b, fm, frm, fb, right, tol / 2.0L, depth + 1);
    }
  };
  Impl impl{f, max_depth};
  const LMat fa = f(lo);
  const LMat fm = f(0.5L * (lo + hi));
  const LMat fb = f(hi);
  const LMat whole = (fa + fm * 4.0L + fb) * ((hi - lo) / 6.0L);
  return impl.recurse(lo, hi, fa, fm, fb, whole, tol, 0);
}

/// Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1].
inline void gauss_legendre(int n, std::vector<long double>& nodes,
                           std::vector<long double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1.0L, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const long double dp = n * (x * p1 - p0) / (x * x - 1.0L);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    nodes[i] = x;
    long double p0 = 1.0L, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2.0L * k - 1.0L) * x * p1 - (k - 1.0L) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    const long double dp = n * (x * p1 - p0) / (x * x - 1.0L);
    weights[i] = 2.0L / ((1.0L - x * x) * dp * dp);
  }
}

/// Unscaled transition kernel f^delta for one merged event, in extended
/// precision via the series exponential.
inline LMat unscaled_kernel(const ModelParams& params, double gamma_before,
                            double gamma_after, double dt, EventKind kind) {
  const std::size_t r = params.order();
  LMat a = to_long(params.q);
  for (std::size_t i = 0; i < r; ++i)
    a(i, i) -= static_cast<long double>(params.lambda[i]) * gamma_before;
  LMat f = (dt == 0.0) ? LMat::identity(r) : series_expm(a * static_cast<long double>(dt));
  if (kind == EventKind::claim) {
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        f(i, j) *= static_cast<long double>(params.lambda[j]) * gamma_after;
  }
  return f;
}

/// Forward partial products pi * prod_{l<=k} f_l (index 0 holds pi) and
/// backward partial products prod_{l>=k} f_l * 1 (index n+1 holds ones).
struct UnscaledProducts {
  std::vector<LVec> prefix;  // size n+1
  std::vector<LVec> suffix;  // size n+2; suffix[k] = prod_{l>=k} f_l 1
  std::vector<LMat> kernels;
  long double likelihood = 0.0L;
};

inline UnscaledProducts unscaled_products(const ModelParams& params,
                                          const EventSequence& events) {
  const std::size_t n = events.size();
  const std::size_t r = params.order();
  UnscaledProducts out;
  out.kernels.resize(n);
  out.prefix.resize(n + 1);
  out.suffix.resize(n + 2);

  double prev_t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    out.kernels[k] = unscaled_kernel(params, events.gamma_before[k], events.gamma_after[k],
                                     events.times[k] - prev_t, events.kinds[k]);
    prev_t = events.times[k];
  }
  out.prefix[0].assign(params.pi.begin(), params.pi.end());
  for (std::size_t k = 0; k < n; ++k) out.prefix[k + 1] = vec_mat(out.prefix[k], out.kernels[k]);
  out.suffix[n + 1].assign(r, 1.0L);
  for (std::size_t k = n; k >= 1; --k)
    out.suffix[k] = mat_vec(out.kernels[k - 1], out.suffix[k + 1]);
  out.likelihood = vec_sum(out.prefix[n]);
  return out;
}

/// Smoothed posterior P[M(t_k) = i | all events] from the unscaled products.
inline std::vector<std::vector<double>> brute_force_smoothed(const ModelParams& params,
                                                             const EventSequence& events) {
  const UnscaledProducts prod = unscaled_products(params, events);
  const std::size_t n = events.size();
  const std::size_t r = params.order();
  std::vector<std::vector<double>> probs(n, std::vector<double>(r));
  for (std::size_t k = 1; k <= n; ++k)
    for (std::size_t i = 0; i < r; ++i)
      probs[k - 1][i] = static_cast<double>(prod.prefix[k][i] * prod.suffix[k + 1][i] /
                                            prod.likelihood);
  return probs;
}

struct OracleEstimators {
  Matrix a_hat;  // off-diagonal entries; diagonal = negated row sum
  std::vector<double> n_hat, t_hat, t_star_hat;
};

/// Direct quadrature of the appendix integral formulas: for each inter-event
/// interval, Gauss-Legendre integration of forward(s)_i * backward(s)_j using
/// unscaled extended-precision products. Checks the scaled Van Loan E-step.
inline OracleEstimators quadrature_estimators(const ModelParams& params,
                                              const EventSequence& events, int gl_points = 32) {
  const UnscaledProducts prod = unscaled_products(params, events);
  const std::size_t n = events.size();
  const std::size_t r = params.order();

  std::vector<long double> nodes, weights;
  gauss_legendre(gl_points, nodes, weights);

  OracleEstimators est{Matrix(r, r), std::vector<double>(r, 0.0), std::vector<double>(r, 0.0),
                       std::vector<double>(r, 0.0)};
  LMat occupancy(r, r);       // integral of fwd_i bwd_j over [0, T]
  LVec occ_star(r, 0.0L);     // gamma-weighted diagonal

  double prev_t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t_k = events.times[k];
    const double dt = t_k - prev_t;
    if (dt > 0.0) {
      const double g_int = events.gamma_before[k];
      LMat a = to_long(params.q);
      for (std::size_t i = 0; i < r; ++i)
        a(i, i) -= static_cast<long double>(params.lambda[i]) * g_int;

      // Jump factor applied at the closing event of the interval.
      const bool is_claim = events.kinds[k] == EventKind::claim;
      const double g_event = events.gamma_after[k];

      LVec jumped_tail(r);
      for (std::size_t i = 0; i < r; ++i) {
        const long double jump =
            is_claim ? static_cast<long double>(params.lambda[i]) * g_event : 1.0L;
        jumped_tail[i] = jump * prod.suffix[k + 2][i];
      }

      for (int q = 0; q < gl_points; ++q) {
        const long double s = 0.5L * dt * (nodes[q] + 1.0L);  // offset from prev_t
        const long double w = 0.5L * dt * weights[q];
        const LMat left = series_expm(a * s);
        const LMat right = series_expm(a * (static_cast<long double>(dt) - s));
        LVec fwd = vec_mat(prod.prefix[k], left);
        LVec bwd = mat_vec(right, jumped_tail);
        for (std::size_t i = 0; i < r; ++i) {
          for (std::size_t j = 0; j < r; ++j) occupancy(i, j) += w * fwd[i] * bwd[j];
          occ_star[i] += w * static_cast<long double>(g_int) * fwd[i] * bwd[i];
        }
      }
    }
    prev_t = t_k;
  }

  for (std::size_t i = 0; i < r; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      est.a_hat(i, j) =
          params.q(i, j) * static_cast<double>(occupancy(i, j) / prod.likelihood);
      row += est.a_hat(i, j);
    }
    est.a_hat(i, i) = -row;
    est.t_hat[i] = static_cast<double>(occupancy(i, i) / prod.likelihood);
    est.t_star_hat[i] = static_cast<double>(occ_star[i] / prod.likelihood);
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (events.kinds[k] != EventKind::claim) continue;
    for (std::size_t i = 0; i < r; ++i)
      est.n_hat[i] += static_cast<double>(prod.prefix[k + 1][i] * prod.suffix[k + 2][i] /
                                          prod.likelihood);
  }
  return est;
}

/// Stationary distribution of a generator: solves nu Q = 0, sum nu = 1.
inline std::vector<double> stationary_distribution(const Matrix& q) {
  const std::size_t r = q.rows();
  Matrix m(r, r);
  Matrix rhs(r, 1);
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t i = 0; i < r; ++i) m(j, i) = q(i, j);  // transpose
  }
  for (std::size_t i = 0; i < r; ++i) m(r - 1, i) = 1.0;  // replace last eq by normalization
  rhs(r - 1, 0) = 1.0;
  solve_in_place(m, rhs);
  std::vector<double> nu(r);
  for (std::size_t i = 0; i < r; ++i) nu[i] = rhs(i, 0);
  return nu;
}

// ---------------------------------------------------------------------------
// Statistical helpers for simulation-based checks.

inline double kolmogorov_tail_prob(double b) {
  if (!(b > 0.0)) return 1.0;
  if (b < 1.0) {
    const double f = M_PI * M_PI / (8.0 * b * b);
    double cdf = 0.0;
    for (int k = 1; k <= 5; ++k) cdf += std::exp(-f * (2.0 * k - 1.0) * (2.0 * k - 1.0));
    cdf *= std::sqrt(2.0 * M_PI) / b;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::exp(-2.0 * k * k * b * b);
    tail += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

/// One-sample KS p-value against the given CDF (asymptotic Kolmogorov law).
inline double ks_test_pvalue(std::vector<double> sample,
                             const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const std::size_t n = sample.size();
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / static_cast<double>(n)));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / static_cast<double>(n) - f));
  }
  return kolmogorov_tail_prob(std::sqrt(static_cast<double>(n)) * d);
}

/// Two-sample KS p-value (asymptotic; conservative in the presence of ties).
inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  return kolmogorov_tail_prob(en * d);
}

}  // namespace mmnpp::testing

#endif  // MMNPP_TESTS_SUPPORT_ORACLES_HPP
