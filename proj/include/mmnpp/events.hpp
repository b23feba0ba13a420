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

#ifndef MMNPP_EVENTS_HPP
#define MMNPP_EVENTS_HPP

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "mmnpp/exposure.hpp"

namespace mmnpp {

enum class EventKind : int {
  exposure_change = 0,  ///< change in the exposure step function (incl. horizon end)
  claim = 1,            ///< event of interest
};

/// Merged, chronologically ordered stream of claim arrivals and exposure
/// changes. The exposure is constant on the open interval between consecutive
/// entries; gamma_before holds that value and gamma_after the right-continuous
/// value in force at the entry itself. The final entry always closes the
/// observation window at the horizon (a survival-only exposure_change entry is
/// appended when no event falls exactly at the horizon).
struct EventSequence {
  std::vector<double> times;
  std::vector<EventKind> kinds;
  std::vector<double> gamma_before;
  std::vector<double> gamma_after;
  double horizon = 0.0;

  std::size_t size() const { return times.size(); }

  std::size_t claim_count() const {
    std::size_t n = 0;
    for (EventKind k : kinds) n += (k == EventKind::claim) ? 1 : 0;
    return n;
  }

  std::vector<double> claim_times() const {
    std::vector<double> out;
    out.reserve(times.size());
    for (std::size_t k = 0; k < times.size(); ++k)
      if (kinds[k] == EventKind::claim) out.push_back(times[k]);
    return out;
  }
};

/// Merges sorted claim times with the interior exposure breakpoints. At equal
/// times the breakpoint entry precedes the claim, so the claim's jump factor
/// picks up the newly effective exposure value.
inline EventSequence build_event_sequence(const std::vector<double>& claim_times,
                                          const ExposureStepFunction& gamma) {
  const double horizon = gamma.horizon();
  for (std::size_t i = 0; i < claim_times.size(); ++i) {
    if (!(claim_times[i] >= 0.0) || claim_times[i] > horizon)
      throw Error(ErrorCode::out_of_horizon,
                  "claim time " + std::to_string(claim_times[i]) + " outside [0, horizon]");
    if (i > 0 && claim_times[i] < claim_times[i - 1])
      throw Error(ErrorCode::unsorted_input, "claim times must be nondecreasing");
  }

  const std::vector<double>& starts = gamma.piece_starts();

  EventSequence seq;
  seq.horizon = horizon;
  seq.times.reserve(claim_times.size() + starts.size());
  seq.kinds.reserve(claim_times.size() + starts.size());

  std::size_t ci = 0, bi = 1;  // starts[0] == 0 opens the first piece and is not an event
  while (ci < claim_times.size() || bi < starts.size()) {
    const bool take_breakpoint =
        bi < starts.size() &&
        (ci >= claim_times.size() || starts[bi] <= claim_times[ci]);
    if (take_breakpoint) {
      seq.times.push_back(starts[bi]);
      seq.kinds.push_back(EventKind::exposure_change);
      ++bi;
    } else {
      seq.times.push_back(claim_times[ci]);
      seq.kinds.push_back(EventKind::claim);
      ++ci;
    }
  }

  if (seq.times.empty() || seq.times.back() < horizon) {
    seq.times.push_back(horizon);
    seq.kinds.push_back(EventKind::exposure_change);
  }

  seq.gamma_before.resize(seq.times.size());
  seq.gamma_after.resize(seq.times.size());
  double prev_time = 0.0;
  for (std::size_t k = 0; k < seq.times.size(); ++k) {
    const double t = seq.times[k];
    seq.gamma_before[k] = (t > prev_time) ? gamma.value_before(t) : gamma.value_at(t);
    seq.gamma_after[k] = gamma.value_at(t);
    prev_time = t;
  }
  return seq;
}

/// Sample path of the hidden chain: states are 0-based internally and held on
/// [times[k], times[k+1]); the path covers [0, horizon].
struct RegimePath {
  std::vector<double> times;  ///< m+2 entries, first 0, last horizon
  std::vector<int> states;    ///< m+1 entries; consecutive states differ

  double horizon() const { return times.back(); }

  int state_at(double t) const {
    if (!(t >= times.front()) || t > times.back())
      throw Error(ErrorCode::out_of_horizon, "time outside the regime path");
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t idx = static_cast<std::size_t>(it - times.begin());
    if (idx >= times.size()) idx = times.size() - 1;  // t == horizon
    return states[idx - 1];
  }
};

}  // namespace mmnpp

#endif  // MMNPP_EVENTS_HPP
