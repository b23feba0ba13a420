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

#ifndef MMNPP_SIMULATE_HPP
#define MMNPP_SIMULATE_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "mmnpp/events.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/model.hpp"
#include "mmnpp/rng.hpp"

namespace mmnpp {

struct SimulationConfig {
  ModelParams params;
  ExposureStepFunction gamma;
  double horizon;
  std::uint64_t seed = 0;
};

struct SimulationResult {
  std::vector<double> claim_times;  ///< strictly increasing
  RegimePath path;
  int jitter_count = 0;  ///< coincident arrivals separated by 1e-12
};

/// Exact simulation of the hidden chain: initial state from pi, holding time
/// in state i exponential with rate q_i, next state proportional to the
/// off-diagonal row. A state with q_i = 0 is absorbing.
inline RegimePath simulate_ctmc(const ModelParams& params, double horizon,
                                std::uint64_t seed) {
  const std::size_t r = params.order();
  Rng rng(seed);
  RegimePath path;
  path.times.push_back(0.0);

  int state = static_cast<int>(rng.categorical(params.pi));
  double t = 0.0;
  while (true) {
    path.states.push_back(state);
    const double rate = -params.q(state, state);
    if (!(rate > 0.0)) break;  // absorbing
    t += rng.exponential(rate);
    if (t >= horizon) break;
    std::vector<double> row(r, 0.0);
    for (std::size_t j = 0; j < r; ++j)
      if (static_cast<int>(j) != state) row[j] = params.q(state, j);
    state = static_cast<int>(rng.categorical(row));
    path.times.push_back(t);
  }
  path.times.push_back(horizon);
  return path;
}

/// Simulates claim arrivals conditional on a given regime path: on each
/// maximal interval where both the regime and the exposure are constant,
/// arrivals are homogeneous Poisson with rate lambda_s * gamma, drawn by
/// inversion. Coincident times (possible only through floating-point
/// degeneracy) are separated by a 1e-12 jitter and counted.
inline SimulationResult simulate_arrivals(const ModelParams& params,
                                          const ExposureStepFunction& gamma,
                                          const RegimePath& path, Rng& rng) {
  SimulationResult result;
  result.path = path;

  // Merged grid of regime jumps and exposure breakpoints.
  std::vector<double> grid = path.times;
  const std::vector<double>& starts = gamma.piece_starts();
  grid.insert(grid.end(), starts.begin() + 1, starts.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    const double a = grid[g];
    const double b = grid[g + 1];
    const int s = path.state_at(a);
    const double rate = params.lambda[static_cast<std::size_t>(s)] * gamma.value_at(a);
    if (!(rate > 0.0)) continue;
    double t = a + rng.exponential(rate);
    while (t < b) {
      if (!result.claim_times.empty() && t <= result.claim_times.back()) {
        t = result.claim_times.back() + 1e-12;
        ++result.jitter_count;
        if (t >= b) break;
      }
      result.claim_times.push_back(t);
      t += rng.exponential(rate);
    }
  }
  return result;
}

/// Simulates the full process: path from sub-stream 0 of the seed, arrivals
/// from sub-stream 1.
inline SimulationResult simulate_mmnpp(const SimulationConfig& config) {
  if (!(config.horizon > 0.0))
    throw Error(ErrorCode::out_of_horizon, "simulation horizon must be positive");
  if (config.gamma.horizon() < config.horizon)
    throw Error(ErrorCode::out_of_horizon, "exposure must cover the simulation horizon");
  RegimePath path = simulate_ctmc(config.params, config.horizon, derive_stream(config.seed, 0));
  Rng arrivals(derive_stream(config.seed, 1));
  return simulate_arrivals(config.params, config.gamma, path, arrivals);
}

/// Sorted merge of two event streams on a common horizon.
inline std::vector<double> superpose(const std::vector<double>& a,
                                     const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace mmnpp

#endif  // MMNPP_SIMULATE_HPP
