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

#ifndef MMNPP_MODEL_HPP
#define MMNPP_MODEL_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mmnpp/matrix.hpp"

namespace mmnpp {

/// Parameters of a Markov-modulated (non-)homogeneous Poisson process:
/// generator Q of the hidden chain, per-regime baseline intensities, and
/// the initial regime distribution. Immutable by convention once validated.
struct ModelParams {
  Matrix q;                    ///< r x r generator, rows sum to zero
  std::vector<double> lambda;  ///< r positive baseline intensities
  std::vector<double> pi;      ///< r initial regime probabilities

  std::size_t order() const { return lambda.size(); }
};

/// Checks and normalizes raw parameter values. Row sums of Q within 1e-9 of
/// zero are re-balanced onto the diagonal; larger deviations are rejected.
inline ModelParams validate_params(Matrix q, std::vector<double> lambda,
                                   std::vector<double> pi) {
  const std::size_t r = q.rows();
  if (r == 0 || q.cols() != r)
    throw Error(ErrorCode::dimension_mismatch, "Q must be square and non-empty");
  if (lambda.size() != r || pi.size() != r)
    throw Error(ErrorCode::dimension_mismatch,
                "lambda and pi must have length equal to the order of Q");
  if (!q.is_finite()) throw Error(ErrorCode::non_finite, "Q has non-finite entries");

  for (std::size_t i = 0; i < r; ++i) {
    double off_sum = 0.0;
    for (std::size_t j = 0; j < r; ++j) {
      if (i == j) continue;
      if (q(i, j) < 0.0)
        throw Error(ErrorCode::negative_off_diagonal,
                    "q[" + std::to_string(i) + "][" + std::to_string(j) + "] < 0");
      off_sum += q(i, j);
    }
    const double row_sum = off_sum + q(i, i);
    if (std::abs(row_sum) > 1e-9)
      throw Error(ErrorCode::row_sum_violation,
                  "row " + std::to_string(i) + " of Q sums to " + std::to_string(row_sum));
    q(i, i) = -off_sum;  // absorb I/O rounding exactly
  }

  for (std::size_t i = 0; i < r; ++i) {
    if (!std::isfinite(lambda[i]) || lambda[i] <= 0.0)
      throw Error(ErrorCode::non_positive_intensity,
                  "lambda[" + std::to_string(i) + "] must be positive");
  }

  double pi_sum = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (!std::isfinite(pi[i]) || pi[i] < 0.0)
      throw Error(ErrorCode::bad_probability_vector,
                  "pi[" + std::to_string(i) + "] must be >= 0");
    pi_sum += pi[i];
  }
  if (std::abs(pi_sum - 1.0) > 1e-9)
    throw Error(ErrorCode::bad_probability_vector,
                "pi sums to " + std::to_string(pi_sum));
  for (double& p : pi) p /= pi_sum;

  return ModelParams{std::move(q), std::move(lambda), std::move(pi)};
}

}  // namespace mmnpp

#endif  // MMNPP_MODEL_HPP
