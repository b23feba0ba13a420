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

#ifndef MMNPP_TESTS_SUPPORT_GENERATORS_HPP
#define MMNPP_TESTS_SUPPORT_GENERATORS_HPP

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "mmnpp/events.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/matrix.hpp"
#include "mmnpp/model.hpp"
#include "mmnpp/simulate.hpp"

namespace mmnpp::testing {

/// The three-state generator and intensities used throughout the recovery
/// studies.
inline ModelParams reference_model() {
  Matrix q(3, 3);
  q(0, 0) = -0.8; q(0, 1) = 0.5;  q(0, 2) = 0.3;
  q(1, 0) = 0.6;  q(1, 1) = -1.0; q(1, 2) = 0.4;
  q(2, 0) = 0.3;  q(2, 1) = 0.5;  q(2, 2) = -0.8;
  return validate_params(q, {5.0, 10.0, 20.0}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
}

/// Exposure cycling through the given values, one piece per `period` units.
inline ExposureStepFunction cycling_exposure(double horizon, double period,
                                             const std::vector<double>& values) {
  std::vector<double> starts, vals;
  std::size_t i = 0;
  for (double t = 0.0; t < horizon; t += period) {
    starts.push_back(t);
    vals.push_back(values[i % values.size()]);
    ++i;
  }
  return ExposureStepFunction(std::move(starts), std::move(vals), horizon);
}

/// Random valid model: distinct intensities, moderately mixing generator.
inline ModelParams random_model(std::mt19937_64& rng, std::size_t order) {
  std::uniform_real_distribution<double> off_dist(0.3, 1.5);
  std::uniform_real_distribution<double> jitter(0.8, 1.25);
  Matrix q(order, order);
  for (std::size_t i = 0; i < order; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < order; ++j) {
      if (i == j) continue;
      q(i, j) = off_dist(rng) / static_cast<double>(std::max<std::size_t>(1, order - 1));
      row += q(i, j);
    }
    q(i, i) = -row;
  }
  std::vector<double> lambda(order);
  double base = 2.0 * jitter(rng);
  for (std::size_t i = 0; i < order; ++i) {
    lambda[i] = base;
    base *= 2.2 * jitter(rng);  // well-separated intensities
  }
  std::vector<double> pi(order, 1.0 / static_cast<double>(order));
  return validate_params(std::move(q), std::move(lambda), std::move(pi));
}

/// Random step exposure with a handful of pieces over [0, horizon].
inline ExposureStepFunction random_exposure(std::mt19937_64& rng, double horizon,
                                            std::size_t pieces) {
  std::uniform_real_distribution<double> value_dist(0.6, 1.8);
  std::vector<double> starts{0.0}, values{value_dist(rng)};
  for (std::size_t i = 1; i < pieces; ++i) {
    starts.push_back(horizon * static_cast<double>(i) / static_cast<double>(pieces));
    values.push_back(value_dist(rng));
  }
  return ExposureStepFunction(std::move(starts), std::move(values), horizon);
}

struct RandomInstance {
  ModelParams params;
  ExposureStepFunction gamma;
  EventSequence events;
  SimulationResult sim;
};

/// Simulates a data set from a random model, trimming the horizon so that the
/// claim count lands near `target_claims`.
inline RandomInstance random_instance(std::uint64_t seed, std::size_t order,
                                      std::size_t target_claims, std::size_t gamma_pieces = 4) {
  std::mt19937_64 rng(seed);
  ModelParams params = random_model(rng, order);
  std::vector<double> nu(order, 1.0 / static_cast<double>(order));
  double mean_rate = 0.0;
  for (std::size_t i = 0; i < order; ++i) mean_rate += nu[i] * params.lambda[i];
  const double horizon = static_cast<double>(target_claims) / mean_rate;
  ExposureStepFunction gamma = random_exposure(rng, horizon, gamma_pieces);
  SimulationConfig config{params, gamma, horizon, seed};
  SimulationResult sim = simulate_mmnpp(config);
  EventSequence events = build_event_sequence(sim.claim_times, gamma);
  return RandomInstance{std::move(params), std::move(gamma), std::move(events), std::move(sim)};
}

}  // namespace mmnpp::testing

#endif  // MMNPP_TESTS_SUPPORT_GENERATORS_HPP
