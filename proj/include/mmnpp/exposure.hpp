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

#ifndef MMNPP_EXPOSURE_HPP
#define MMNPP_EXPOSURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mmnpp/error.hpp"

namespace mmnpp {

/// Known exposure (frequency perturbation) measure as an ordered sequence of
/// strictly positive constant pieces covering [0, horizon]. Evaluation is
/// right-continuous at breakpoints. The operational time rho(t) is the exact
/// piecewise-linear integral of the step function.
class ExposureStepFunction {
 public:
  ExposureStepFunction(std::vector<double> start_times, std::vector<double> values,
                       double horizon)
      : starts_(std::move(start_times)), values_(std::move(values)), horizon_(horizon) {
    if (starts_.empty() || starts_.size() != values_.size())
      throw Error(ErrorCode::dimension_mismatch,
                  "exposure needs matching, non-empty start_times and values");
    if (starts_.front() != 0.0)
      throw Error(ErrorCode::out_of_horizon, "first exposure piece must start at 0");
    if (!(std::isfinite(horizon_)) || horizon_ < 0.0)
      throw Error(ErrorCode::out_of_horizon, "horizon must be finite and >= 0");
    for (std::size_t i = 0; i < starts_.size(); ++i) {
      if (!std::isfinite(starts_[i]) || !std::isfinite(values_[i]))
        throw Error(ErrorCode::non_finite, "exposure entries must be finite");
      if (values_[i] <= 0.0)
        throw Error(ErrorCode::non_positive_intensity,
                    "exposure value at piece " + std::to_string(i) + " must be positive");
      if (i > 0 && !(starts_[i] > starts_[i - 1]))
        throw Error(ErrorCode::unsorted_input, "exposure start times must strictly increase");
    }
    if (starts_.back() >= horizon_ && !(horizon_ == 0.0 && starts_.size() == 1))
      throw Error(ErrorCode::out_of_horizon, "last exposure piece starts at or after horizon");

    rho_at_start_.resize(starts_.size(), 0.0);
    for (std::size_t i = 1; i < starts_.size(); ++i)
      rho_at_start_[i] = rho_at_start_[i - 1] + values_[i - 1] * (starts_[i] - starts_[i - 1]);
    rho_total_ = rho_at_start_.back() + values_.back() * (horizon_ - starts_.back());
  }

  static ExposureStepFunction constant(double value, double horizon) {
    return ExposureStepFunction({0.0}, {value}, horizon);
  }

  double horizon() const { return horizon_; }
  double total_operational_time() const { return rho_total_; }
  const std::vector<double>& piece_starts() const { return starts_; }
  const std::vector<double>& piece_values() const { return values_; }

  /// Right-continuous evaluation: value of the piece containing t.
  double value_at(double t) const {
    return values_[piece_index(t)];
  }

  /// Value immediately to the left of t (left limit). For t == 0 this is the
  /// first piece's value.
  double value_before(double t) const {
    check_in_horizon(t);
    if (t == 0.0) return values_.front();
    const auto it = std::lower_bound(starts_.begin(), starts_.end(), t);
    const std::size_t idx = static_cast<std::size_t>(it - starts_.begin());
    return values_[idx - 1];
  }

  /// Operational time rho(t) = integral of the exposure over [0, t].
  double operational_time(double t) const {
    const std::size_t i = piece_index(t);
    return rho_at_start_[i] + values_[i] * (t - starts_[i]);
  }

  /// Inverse of rho on [0, rho(horizon)].
  double inverse_operational_time(double s) const {
    if (!(s >= 0.0) || s > rho_total_ * (1.0 + 1e-15) + 1e-300)
      throw Error(ErrorCode::out_of_horizon,
                  "operational time " + std::to_string(s) + " outside [0, rho(T)]");
    s = std::min(s, rho_total_);
    auto it = std::upper_bound(rho_at_start_.begin(), rho_at_start_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - rho_at_start_.begin()) - 1;
    const double t = starts_[i] + (s - rho_at_start_[i]) / values_[i];
    return std::min(t, horizon_);
  }

 private:
  std::size_t piece_index(double t) const {
    check_in_horizon(t);
    auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
  }

  void check_in_horizon(double t) const {
    if (!(t >= 0.0) || t > horizon_)
      throw Error(ErrorCode::out_of_horizon,
                  "time " + std::to_string(t) + " outside [0, " + std::to_string(horizon_) + "]");
  }

  std::vector<double> starts_;
  std::vector<double> values_;
  double horizon_;
  std::vector<double> rho_at_start_;
  double rho_total_;
};

/// Samples a dense exposure curve into constant pieces of the given width.
/// Each piece takes the curve's value at the piece midpoint. Approximating an
/// arbitrary bounded-variation curve is the caller's responsibility; this
/// helper only performs the sampling.
inline ExposureStepFunction discretize_exposure(const std::function<double(double)>& gamma,
                                                double horizon, double step) {
  if (!(step > 0.0) || !(horizon > 0.0))
    throw Error(ErrorCode::out_of_horizon, "discretize_exposure needs positive step and horizon");
  std::vector<double> starts, values;
  for (double t = 0.0; t < horizon; t += step) {
    const double mid = std::min(t + 0.5 * step, horizon);
    starts.push_back(t);
    values.push_back(gamma(mid));
  }
  return ExposureStepFunction(std::move(starts), std::move(values), horizon);
}

}  // namespace mmnpp

#endif  // MMNPP_EXPOSURE_HPP
