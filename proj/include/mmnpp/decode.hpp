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

#ifndef MMNPP_DECODE_HPP
#define MMNPP_DECODE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmnpp/calibrate.hpp"
#include "mmnpp/events.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/model.hpp"

namespace mmnpp {

/// Per-event regime probabilities (filtered or smoothed), one probability
/// vector per merged event.
struct StateProbabilitySeries {
  std::vector<double> times;
  std::vector<EventKind> kinds;
  std::vector<std::vector<double>> probs;

  std::size_t size() const { return times.size(); }
};

/// Smoothed regime probabilities: p_k proportional to L(k) .* R(k+1),
/// normalized. Entries within -1e-12 of zero are clipped and the vector
/// renormalized.
inline StateProbabilitySeries smoothed_probs(const EventSequence& events,
                                             const RecursionState& rec) {
  const std::size_t n = events.size();
  if (rec.forward.size() != n + 1)
    throw Error(ErrorCode::dimension_mismatch, "recursion state does not match events");
  const std::size_t r = rec.forward[0].size();

  StateProbabilitySeries series;
  series.times = events.times;
  series.kinds = events.kinds;
  series.probs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> p(r);
    double total = 0.0;
    for (std::size_t i = 0; i < r; ++i) {
      double v = rec.forward[k + 1][i] * rec.backward[k + 2][i];
      if (v < 0.0) {
        if (v < -1e-12)
          throw Error(ErrorCode::non_finite, "negative smoothed probability beyond tolerance");
        v = 0.0;
      }
      p[i] = v;
      total += v;
    }
    for (double& v : p) v /= total;
    series.probs[k] = std::move(p);
  }
  return series;
}

/// Filtered regime probabilities L(k) (posterior given events up to t_k).
inline StateProbabilitySeries filtered_probs(const EventSequence& events,
                                             const RecursionState& rec) {
  StateProbabilitySeries series;
  series.times = events.times;
  series.kinds = events.kinds;
  series.probs.assign(rec.forward.begin() + 1, rec.forward.end());
  return series;
}

/// Most likely regime at each event (0-based); ties resolve to the lower
/// state index.
inline std::vector<int> most_likely_regimes(const StateProbabilitySeries& series) {
  std::vector<int> out(series.size());
  for (std::size_t k = 0; k < series.size(); ++k) {
    const std::vector<double>& p = series.probs[k];
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
      if (p[i] > p[best]) best = i;
    out[k] = static_cast<int>(best);
  }
  return out;
}

/// Ordered window boundaries partitioning [0, horizon].
struct WindowGrid {
  std::vector<double> edges;

  std::size_t window_count() const { return edges.empty() ? 0 : edges.size() - 1; }
};

inline WindowGrid make_window_grid(double horizon, double width) {
  if (!(width > 0.0) || !(horizon > 0.0))
    throw Error(ErrorCode::grid_outside_horizon, "window width and horizon must be positive");
  WindowGrid grid;
  for (double e = 0.0; e < horizon; e += width) grid.edges.push_back(e);
  grid.edges.push_back(horizon);
  return grid;
}

/// Observed claim counts per window; windows are [e_i, e_{i+1}) with the last
/// window closed at the horizon.
inline std::vector<double> observed_counts(const std::vector<double>& claim_times,
                                           const WindowGrid& grid) {
  std::vector<double> counts(grid.window_count(), 0.0);
  for (double t : claim_times) {
    auto it = std::upper_bound(grid.edges.begin(), grid.edges.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - grid.edges.begin());
    if (idx == 0 || t > grid.edges.back()) continue;  // outside the grid
    if (idx > counts.size()) idx = counts.size();     // t at the final edge
    counts[idx - 1] += 1.0;
  }
  return counts;
}

/// Expected claim counts per window under the fitted model: the exact
/// posterior intensity integral. For every piece of a window falling inside
/// inter-event interval k, the integral of
///   sum_i P[M(s)=i | data] lambda_i gamma(s)
/// is evaluated in closed form via a Van Loan block on the sub-interval,
/// propagated to the segment endpoints. Restricted to the whole horizon this
/// reproduces sum_i lambda_i * tStarHat_i exactly.
inline std::vector<double> expected_counts(const ModelParams& params,
                                           const EventSequence& events,
                                           const RecursionState& rec,
                                           const ExposureStepFunction& gamma,
                                           const WindowGrid& grid) {
  if (grid.edges.size() < 2)
    throw Error(ErrorCode::grid_outside_horizon, "window grid needs at least one window");
  if (!(grid.edges.front() >= 0.0) || grid.edges.back() > gamma.horizon() * (1.0 + 1e-12))
    throw Error(ErrorCode::grid_outside_horizon, "window grid extends beyond the horizon");
  for (std::size_t i = 1; i < grid.edges.size(); ++i)
    if (!(grid.edges[i] > grid.edges[i - 1]))
      throw Error(ErrorCode::grid_outside_horizon, "window edges must strictly increase");
  const std::size_t n = events.size();
  if (rec.forward.size() != n + 1 || rec.scale.size() != n)
    throw Error(ErrorCode::dimension_mismatch, "recursion state does not match events");

  const std::size_t r = params.order();
  std::vector<double> expected(grid.window_count(), 0.0);

  std::size_t w = 0;
  double prev_t = 0.0;
  for (std::size_t k = 0; k < n && w < grid.window_count(); ++k) {
    const double t_k = events.times[k];
    const double dt = t_k - prev_t;
    if (dt > 0.0) {
      const double g_int = events.gamma_before[k];
      const Matrix a = kernel_generator(params, g_int);
      const std::vector<double>& left = rec.forward[k];
      const std::vector<double>& right = rec.backward[k + 2];
      const bool is_claim = events.kinds[k] == EventKind::claim;
      const double g_event = events.gamma_after[k];
      Matrix b(r, r);
      for (std::size_t i = 0; i < r; ++i) {
        const double ri = (is_claim ? params.lambda[i] * g_event : 1.0) * right[i];
        for (std::size_t j = 0; j < r; ++j) b(i, j) = ri * left[j];
      }
      const double inv_c = 1.0 / rec.scale[k];

      // Split (prev_t, t_k] at window edges; integrate each segment exactly.
      double seg_lo = prev_t;
      while (seg_lo < t_k && w < grid.window_count()) {
        while (w < grid.window_count() && grid.edges[w + 1] <= seg_lo) ++w;
        if (w >= grid.window_count()) break;
        if (seg_lo < grid.edges[w]) {  // interval part before the grid begins
          seg_lo = std::min(t_k, grid.edges[w]);
          continue;
        }
        const double seg_hi = std::min(t_k, grid.edges[w + 1]);
        if (seg_hi <= seg_lo) break;
        const double v0 = seg_lo - prev_t;
        const double v1 = seg_hi - prev_t;

        Matrix m = van_loan_blocks(a, b, v1 - v0).integral;
        if (v0 > 0.0) m = m * expm(a * v0);
        if (v1 < dt) m = expm(a * (dt - v1)) * m;

        double mass = 0.0;
        for (std::size_t i = 0; i < r; ++i) mass += params.lambda[i] * m(i, i);
        expected[w] += g_int * inv_c * mass;
        seg_lo = seg_hi;
      }
    }
    prev_t = t_k;
  }
  return expected;
}

}  // namespace mmnpp

#endif  // MMNPP_DECODE_HPP
