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

#ifndef MMNPP_CALIBRATE_HPP
#define MMNPP_CALIBRATE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mmnpp/events.hpp"
#include "mmnpp/expm.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/matrix.hpp"
#include "mmnpp/model.hpp"

namespace mmnpp {

/// Per-interval Chapman-Kolmogorov kernels. fbar is the survival kernel
/// exp[(Q - Lambda*gamma) dt]; fdelta appends the jump factor Lambda*gamma at
/// the event for claims and equals fbar for exposure changes.
struct TransitionKernels {
  Matrix fbar;
  Matrix fdelta;
};

/// A = Q - Lambda * gamma (the kernel generator for a constant-exposure stretch).
inline Matrix kernel_generator(const ModelParams& params, double gamma_value) {
  Matrix a = params.q;
  for (std::size_t i = 0; i < params.order(); ++i)
    a(i, i) -= params.lambda[i] * gamma_value;
  return a;
}

inline TransitionKernels interval_kernels(const ModelParams& params, double gamma_before,
                                          double gamma_at_event, double dt, EventKind kind) {
  if (!(dt >= 0.0)) throw Error(ErrorCode::non_finite, "interval length must be >= 0");
  const std::size_t r = params.order();
  TransitionKernels k;
  k.fbar = (dt == 0.0) ? Matrix::identity(r)
                       : expm(kernel_generator(params, gamma_before) * dt);
  if (kind == EventKind::claim) {
    k.fdelta = k.fbar;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j)
        k.fdelta(i, j) *= params.lambda[j] * gamma_at_event;
  } else {
    k.fdelta = k.fbar;
  }
  if (!k.fdelta.is_finite()) throw Error(ErrorCode::non_finite, "transition kernel");
  return k;
}

/// Scaled forward/backward state. forward[k] holds L(k) for k = 0..n with
/// L(0) = pi; backward[k] holds R(k) for k = 1..n+1 with R(n+1) = 1 (slot 0 is
/// unused); scale[k-1] holds the normalizer c_k, whose logs sum to the data
/// log-likelihood.
struct RecursionState {
  std::vector<std::vector<double>> forward;
  std::vector<std::vector<double>> backward;
  std::vector<double> scale;
};

namespace detail {

inline void check_event_spacing(const EventSequence& events) {
  const std::size_t n = events.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double prev = (k == 0) ? 0.0 : events.times[k - 1];
    if (events.times[k] < prev)
      throw Error(ErrorCode::unsorted_input, "event times must be nondecreasing");
    if (k > 0 && events.times[k] == prev &&
        !(events.kinds[k - 1] == EventKind::exposure_change &&
          events.kinds[k] == EventKind::claim))
      throw Error(ErrorCode::unsorted_input,
                  "zero-length interval between events at t=" + std::to_string(prev));
  }
}

}  // namespace detail

inline RecursionState forward_backward(const ModelParams& params, const EventSequence& events) {
  const std::size_t n = events.size();
  if (n == 0) throw Error(ErrorCode::length_mismatch, "event sequence is empty");
  detail::check_event_spacing(events);

  const std::size_t r = params.order();
  RecursionState rec;
  rec.forward.resize(n + 1);
  rec.backward.resize(n + 2);
  rec.scale.resize(n);
  rec.forward[0] = params.pi;

  std::vector<Matrix> kernels(n);
  double prev_t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dt = events.times[k] - prev_t;
    kernels[k] = interval_kernels(params, events.gamma_before[k], events.gamma_after[k], dt,
                                  events.kinds[k])
                     .fdelta;
    std::vector<double> v = vec_mat(rec.forward[k], kernels[k]);
    const double c = vec_sum(v);
    if (!std::isfinite(c) || !(c > 1e-300))
      throw Error(ErrorCode::underflow_collapse,
                  "scale c_" + std::to_string(k + 1) + " = " + std::to_string(c));
    for (double& x : v) x /= c;
    rec.forward[k + 1] = std::move(v);
    rec.scale[k] = c;
    prev_t = events.times[k];
  }

  rec.backward[n + 1].assign(r, 1.0);
  for (std::size_t k = n; k >= 1; --k) {
    std::vector<double> w = mat_vec(kernels[k - 1], rec.backward[k + 1]);
    const double c = rec.scale[k - 1];
    for (double& x : w) {
      x /= c;
      if (!std::isfinite(x))
        throw Error(ErrorCode::underflow_collapse,
                    "backward vector diverged at event " + std::to_string(k));
    }
    rec.backward[k] = std::move(w);
  }
  return rec;
}

/// Data log-likelihood: sum of log c_k over all merged events.
inline double log_likelihood(const RecursionState& rec) {
  double s = 0.0;
  for (double c : rec.scale) s += std::log(c);
  return s;
}

/// Closed-form conditional expectations of the complete-data sufficient
/// statistics. a_hat follows the reported-matrix convention (diagonal equal to
/// the negated off-diagonal row sum); t_hat and t_star_hat come from the
/// diagonal of the accumulated Van Loan integrals, which is the gamma-free
/// analogue of the t_star computation and stays defined when q_ii = 0.
struct EStepEstimators {
  Matrix a_hat;
  std::vector<double> n_hat;
  std::vector<double> t_hat;
  std::vector<double> t_star_hat;
};

namespace detail {

struct EStepPartial {
  Matrix weighted;       // sum of I_k / c_k
  Matrix weighted_star;  // sum of gamma_k * I_k / c_k
  std::vector<double> n_hat;
};

inline EStepPartial e_step_chunk(const ModelParams& params, const EventSequence& events,
                                 const RecursionState& rec, std::size_t begin,
                                 std::size_t end) {
  const std::size_t r = params.order();
  EStepPartial part{Matrix(r, r), Matrix(r, r), std::vector<double>(r, 0.0)};
  for (std::size_t k = begin; k < end; ++k) {
    const double c = rec.scale[k];
    const std::vector<double>& left = rec.forward[k];       // L(k-1) in 1-based terms
    const std::vector<double>& right = rec.backward[k + 2];  // R(k+1)
    const bool is_claim = events.kinds[k] == EventKind::claim;

    if (is_claim) {
      const std::vector<double>& post = rec.forward[k + 1];  // L(k)
      for (std::size_t i = 0; i < r; ++i) part.n_hat[i] += post[i] * right[i];
    }

    const double prev_t = (k == 0) ? 0.0 : events.times[k - 1];
    const double dt = events.times[k] - prev_t;
    if (dt == 0.0) continue;

    const double g_int = events.gamma_before[k];
    const Matrix a = kernel_generator(params, g_int);
    Matrix b(r, r);
    if (is_claim) {
      const double g_event = events.gamma_after[k];
      for (std::size_t i = 0; i < r; ++i) {
        const double ri = params.lambda[i] * g_event * right[i];
        for (std::size_t j = 0; j < r; ++j) b(i, j) = ri * left[j];
      }
    } else {
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) b(i, j) = right[i] * left[j];
    }

    const VanLoanBlocks<double> blocks = van_loan_blocks(a, b, dt);

    // Consistency guard: the propagator block re-derives c_k.
    double c_check = 0.0;
    const std::vector<double> through = vec_mat(left, blocks.propagator);
    if (is_claim) {
      const double g_event = events.gamma_after[k];
      for (std::size_t j = 0; j < r; ++j) c_check += through[j] * params.lambda[j] * g_event;
    } else {
      c_check = vec_sum(through);
    }
    if (!(std::abs(c_check - c) <= 1e-8 * std::max(c, 1e-300)))
      throw Error(ErrorCode::non_finite,
                  "Van Loan propagator inconsistent with forward scale at event " +
                      std::to_string(k + 1));

    const double inv_c = 1.0 / c;
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t j = 0; j < r; ++j) {
        const double v = blocks.integral(i, j) * inv_c;
        part.weighted(i, j) += v;
        part.weighted_star(i, j) += g_int * v;
      }
    }
  }
  return part;
}

}  // namespace detail

/// E-step over all inter-event intervals. Work is split into fixed-size
/// chunks whose partial sums are combined in index order, so the result is
/// identical for any thread count.
inline EStepEstimators e_step(const ModelParams& params, const EventSequence& events,
                              const RecursionState& rec, int threads = 1) {
  const std::size_t n = events.size();
  const std::size_t r = params.order();
  if (rec.scale.size() != n || rec.forward.size() != n + 1)
    throw Error(ErrorCode::dimension_mismatch, "recursion state does not match events");

  constexpr std::size_t kChunk = 2048;
  const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<detail::EStepPartial> partials(n_chunks);

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n_chunks)));
  if (workers == 1) {
    for (std::size_t ch = 0; ch < n_chunks; ++ch)
      partials[ch] = detail::e_step_chunk(params, events, rec, ch * kChunk,
                                          std::min(n, (ch + 1) * kChunk));
  } else {
    std::vector<std::thread> pool;
    std::vector<std::string> failures(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t ch = static_cast<std::size_t>(w); ch < n_chunks;
               ch += static_cast<std::size_t>(workers))
            partials[ch] = detail::e_step_chunk(params, events, rec, ch * kChunk,
                                                std::min(n, (ch + 1) * kChunk));
        } catch (const std::exception& e) {
          failures[static_cast<std::size_t>(w)] = e.what();
        }
      });
    }
    for (std::thread& t : pool) t.join();
    for (const std::string& f : failures)
      if (!f.empty()) throw Error(ErrorCode::non_finite, f);
  }

  Matrix weighted(r, r), weighted_star(r, r);
  EStepEstimators est{Matrix(r, r), std::vector<double>(r, 0.0), std::vector<double>(r, 0.0),
                      std::vector<double>(r, 0.0)};
  for (std::size_t ch = 0; ch < n_chunks; ++ch) {
    weighted += partials[ch].weighted;
    weighted_star += partials[ch].weighted_star;
    for (std::size_t i = 0; i < r; ++i) est.n_hat[i] += partials[ch].n_hat[i];
  }

  for (std::size_t i = 0; i < r; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      est.a_hat(i, j) = params.q(i, j) * weighted(j, i);
      row += est.a_hat(i, j);
    }
    est.a_hat(i, i) = -row;
    est.t_hat[i] = weighted(i, i);
    est.t_star_hat[i] = weighted_star(i, i);
  }
  return est;
}

/// M-step: q_ij = a_ij / T_i off the diagonal, lambda_i = n_i / T*_i, pi held
/// fixed. A state whose expected time (or claim mass) falls below the
/// starvation floor keeps its current row/intensity for this iteration and a
/// warning is recorded instead of dividing by ~0.
inline ModelParams m_step(const EStepEstimators& est, const ModelParams& current,
                          double horizon, std::vector<std::string>* warnings = nullptr) {
  const std::size_t r = current.order();
  const double time_floor = 1e-8 * std::max(horizon, 1e-12);
  ModelParams next = current;

  for (std::size_t i = 0; i < r; ++i) {
    const bool starved_time = !(est.t_hat[i] > time_floor) || !(est.t_star_hat[i] > 0.0);
    const bool starved_claims = !(est.n_hat[i] > 1e-12);
    if (starved_time || starved_claims) {
      if (warnings)
        warnings->push_back("state " + std::to_string(i + 1) +
                            " starved (T_hat=" + std::to_string(est.t_hat[i]) +
                            ", n_hat=" + std::to_string(est.n_hat[i]) +
                            "); parameters frozen for this iteration");
      if (starved_time) continue;  // keep both the q row and lambda
      // claims-starved only: the q row is still well determined
    } else {
      next.lambda[i] = est.n_hat[i] / est.t_star_hat[i];
    }
    double row = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      next.q(i, j) = est.a_hat(i, j) / est.t_hat[i];
      row += next.q(i, j);
    }
    next.q(i, i) = -row;
  }
  return next;
}

struct FitOptions {
  double tol_loglik = 1e-4;
  int max_iter = 500;
  int threads = 1;
  /// Alternative stop: max absolute change across Q and lambda entries.
  std::optional<double> tol_params;
};

struct FitResult {
  ModelParams params;
  std::vector<double> loglik_per_iter;
  int iterations = 0;
  bool converged = false;
  RecursionState recursion;     ///< recursions under the returned params
  EStepEstimators estimators;   ///< E-step quantities under the returned params
  std::vector<std::string> warnings;
};

/// Starting values: lambda from the order-r quantiles (levels (2i-1)/2r) of
/// exposure-scaled windowed count rates, a mildly mixing uniform generator,
/// and a uniform initial distribution.
inline ModelParams initial_params(const EventSequence& events, const ExposureStepFunction& gamma,
                                  int order) {
  const std::size_t n = events.claim_count();
  if (order < 1 || n < static_cast<std::size_t>(order))
    throw Error(ErrorCode::non_identifiable,
                "need at least `order` claims (" + std::to_string(n) + " < " +
                    std::to_string(order) + ")");
  const std::size_t r = static_cast<std::size_t>(order);
  const double rho_total = gamma.total_operational_time();
  const double overall_rate = static_cast<double>(n) / rho_total;

  if (r == 1) {
    Matrix q(1, 1);
    return ModelParams{q, {overall_rate}, {1.0}};
  }

  const double horizon = gamma.horizon();
  const std::size_t n_windows = std::max<std::size_t>(8, std::min<std::size_t>(100, n / 2));
  std::vector<double> rates;
  rates.reserve(n_windows);
  const std::vector<double> claims = events.claim_times();
  std::size_t ci = 0;
  for (std::size_t w = 0; w < n_windows; ++w) {
    const double lo = horizon * static_cast<double>(w) / static_cast<double>(n_windows);
    const double hi = (w + 1 == n_windows)
                          ? horizon
                          : horizon * static_cast<double>(w + 1) / static_cast<double>(n_windows);
    std::size_t count = 0;
    while (ci < claims.size() && (claims[ci] < hi || (w + 1 == n_windows && claims[ci] <= hi))) {
      ++count;
      ++ci;
    }
    const double d_rho = gamma.operational_time(hi) - gamma.operational_time(lo);
    rates.push_back(static_cast<double>(count) / d_rho);
  }
  std::sort(rates.begin(), rates.end());

  std::vector<double> lambda(r);
  for (std::size_t i = 0; i < r; ++i) {
    const double level = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(r));
    const double pos = level * static_cast<double>(rates.size() - 1);
    const std::size_t lo_idx = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo_idx);
    const double v = (lo_idx + 1 < rates.size())
                         ? rates[lo_idx] + frac * (rates[lo_idx + 1] - rates[lo_idx])
                         : rates[lo_idx];
    lambda[i] = std::max(v, 1e-3 * overall_rate);
  }

  Matrix q(r, r);
  const double off = 0.1 / static_cast<double>(r - 1);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) q(i, j) = (i == j) ? -0.1 : off;
  }
  std::vector<double> pi(r, 1.0 / static_cast<double>(r));
  return ModelParams{std::move(q), std::move(lambda), std::move(pi)};
}

/// EM loop: forward/backward -> E-step -> M-step, stopping on the
/// log-likelihood difference (or the optional parameter-difference criterion).
/// The returned recursion and estimators describe the returned params.
inline FitResult fit(const EventSequence& events, const ExposureStepFunction& gamma, int order,
                     std::optional<ModelParams> init = std::nullopt, FitOptions opts = {}) {
  if (order < 1) throw Error(ErrorCode::non_identifiable, "order must be >= 1");
  if (events.claim_count() < static_cast<std::size_t>(order))
    throw Error(ErrorCode::non_identifiable, "fewer claims than regimes");
  if (events.horizon != gamma.horizon())
    throw Error(ErrorCode::dimension_mismatch, "events and exposure horizons differ");

  ModelParams params = init ? *init : initial_params(events, gamma, order);
  if (params.order() != static_cast<std::size_t>(order))
    throw Error(ErrorCode::dimension_mismatch, "initial params order mismatch");

  FitResult res;
  RecursionState rec = forward_backward(params, events);
  double ll = log_likelihood(rec);
  res.loglik_per_iter.push_back(ll);

  for (int iter = 1; iter <= opts.max_iter; ++iter) {
    const EStepEstimators est = e_step(params, events, rec, opts.threads);
    ModelParams next = m_step(est, params, events.horizon, &res.warnings);

    double param_delta = 0.0;
    if (opts.tol_params) {
      for (std::size_t i = 0; i < params.order(); ++i) {
        param_delta = std::max(param_delta, std::abs(next.lambda[i] - params.lambda[i]));
        for (std::size_t j = 0; j < params.order(); ++j)
          param_delta = std::max(param_delta, std::abs(next.q(i, j) - params.q(i, j)));
      }
    }

    params = std::move(next);
    rec = forward_backward(params, events);
    const double new_ll = log_likelihood(rec);
    res.loglik_per_iter.push_back(new_ll);
    res.iterations = iter;

    const bool loglik_stop = std::abs(new_ll - ll) < opts.tol_loglik;
    const bool param_stop = opts.tol_params && param_delta < *opts.tol_params;
    ll = new_ll;
    if (loglik_stop || param_stop) {
      res.converged = true;
      break;
    }
  }

  res.params = params;
  res.estimators = e_step(params, events, rec, opts.threads);
  res.recursion = std::move(rec);
  return res;
}

}  // namespace mmnpp

#endif  // MMNPP_CALIBRATE_HPP
