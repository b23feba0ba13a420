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

#ifndef MMNPP_DIAGNOSTICS_HPP
#define MMNPP_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "mmnpp/calibrate.hpp"
#include "mmnpp/decode.hpp"
#include "mmnpp/fft.hpp"

namespace mmnpp {

struct TestReport {
  std::string name;
  double statistic = 0.0;
  double p_value = 1.0;
  std::map<std::string, double> parameters;
};

/// Per-window residuals e_w = observed_w - expected_w.
struct ResidualSeries {
  std::vector<double> values;
  WindowGrid grid;
};

inline ResidualSeries compute_residuals(const ModelParams& params, const EventSequence& events,
                                        const RecursionState& rec,
                                        const ExposureStepFunction& gamma,
                                        const WindowGrid& grid) {
  const std::vector<double> expected = expected_counts(params, events, rec, gamma, grid);
  const std::vector<double> observed = observed_counts(events.claim_times(), grid);
  ResidualSeries out;
  out.grid = grid;
  out.values.resize(expected.size());
  for (std::size_t w = 0; w < expected.size(); ++w)
    out.values[w] = observed[w] - expected[w];
  return out;
}

/// Sample autocorrelations with the biased (1/n) denominator convention.
inline std::vector<double> acf(const std::vector<double>& series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n <= max_lag)
    throw Error(ErrorCode::series_too_short,
                "series length " + std::to_string(n) + " <= max lag " + std::to_string(max_lag));
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double denom = 0.0;
  for (double x : series) denom += (x - mean) * (x - mean);
  if (!(denom > 0.0)) throw Error(ErrorCode::zero_variance, "series has zero variance");

  std::vector<double> rho(max_lag);
  for (std::size_t k = 1; k <= max_lag; ++k) {
    double num = 0.0;
    for (std::size_t t = k; t < n; ++t) num += (series[t] - mean) * (series[t - k] - mean);
    rho[k - 1] = num / denom;
  }
  return rho;
}

namespace detail {

inline double chi_squared_upper_tail(double dof, double x) {
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

/// P(K > b) for the Kolmogorov distribution; the small-b evaluation uses the
/// theta-dual series, the large-b one the alternating tail series.
inline double kolmogorov_tail(double b) {
  if (!(b > 0.0)) return 1.0;
  if (b < 1.0) {
    const double f = M_PI * M_PI / (8.0 * b * b);
    double cdf = 0.0;
    for (int k = 1; k <= 5; ++k)
      cdf += std::exp(-f * static_cast<double>((2 * k - 1) * (2 * k - 1)));
    cdf *= std::sqrt(2.0 * M_PI) / b;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double tail = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::exp(-2.0 * static_cast<double>(k) * static_cast<double>(k) * b * b);
    tail += (k % 2 == 1) ? term : -term;
    if (term < 1e-16) break;
  }
  return std::clamp(tail, 0.0, 1.0);
}

}  // namespace detail

/// Ljung-Box portmanteau test for autocorrelation up to the given lag.
inline TestReport ljung_box(const std::vector<double>& series, std::size_t lag) {
  const std::size_t n = series.size();
  if (n <= lag)
    throw Error(ErrorCode::series_too_short,
                "series length " + std::to_string(n) + " <= lag " + std::to_string(lag));
  const std::vector<double> rho = acf(series, lag);
  double q = 0.0;
  for (std::size_t k = 1; k <= lag; ++k)
    q += rho[k - 1] * rho[k - 1] / static_cast<double>(n - k);
  q *= static_cast<double>(n) * (static_cast<double>(n) + 2.0);

  TestReport report;
  report.name = "ljung_box";
  report.statistic = q;
  report.p_value = detail::chi_squared_upper_tail(static_cast<double>(lag), q);
  report.parameters["lag"] = static_cast<double>(lag);
  return report;
}

/// Bartlett's cumulative-periodogram white-noise test: B is the maximal
/// scaled deviation of the normalized cumulative periodogram from the
/// diagonal, referred to the Kolmogorov distribution.
inline TestReport bartlett_b(const std::vector<double>& series) {
  const std::size_t n = series.size();
  if (n < 16)
    throw Error(ErrorCode::series_too_short, "bartlett_b needs at least 16 observations");
  const std::size_t m = (n - 1) / 2;

  std::vector<std::complex<double>> buf(n);
  for (std::size_t t = 0; t < n; ++t) buf[t] = std::complex<double>(series[t], 0.0);
  const std::vector<std::complex<double>> spec = detail::dft(buf);

  std::vector<double> periodogram(m);
  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    periodogram[j - 1] = std::norm(spec[j]) / static_cast<double>(n);
    total += periodogram[j - 1];
  }
  if (!(total > 0.0)) throw Error(ErrorCode::zero_variance, "flat periodogram");

  double b = 0.0;
  double cum = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    cum += periodogram[j - 1];
    const double dev = std::abs(cum / total - static_cast<double>(j) / static_cast<double>(m));
    b = std::max(b, dev);
  }
  b *= std::sqrt(static_cast<double>(m));

  TestReport report;
  report.name = "bartlett_b";
  report.statistic = b;
  report.p_value = detail::kolmogorov_tail(b);
  report.parameters["ordinates"] = static_cast<double>(m);
  return report;
}

enum class RunsCenter { zero, median };

/// Wald-Wolfowitz runs test on the signs of (series - center); observations
/// exactly at the center are dropped.
inline TestReport runs_test(const std::vector<double>& series,
                            RunsCenter center = RunsCenter::zero) {
  double c = 0.0;
  if (center == RunsCenter::median) {
    std::vector<double> sorted = series;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    if (n == 0) throw Error(ErrorCode::degenerate_signs, "empty series");
    c = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }

  std::vector<int> signs;
  signs.reserve(series.size());
  for (double x : series) {
    if (x > c) signs.push_back(1);
    else if (x < c) signs.push_back(-1);
  }
  double n1 = 0.0, n2 = 0.0;
  for (int s : signs) (s > 0 ? n1 : n2) += 1.0;
  if (!(n1 > 0.0) || !(n2 > 0.0))
    throw Error(ErrorCode::degenerate_signs, "runs test needs values on both sides of the center");

  double runs = 1.0;
  for (std::size_t i = 1; i < signs.size(); ++i)
    if (signs[i] != signs[i - 1]) runs += 1.0;

  const double nn = n1 + n2;
  const double mu = 2.0 * n1 * n2 / nn + 1.0;
  const double var = 2.0 * n1 * n2 * (2.0 * n1 * n2 - nn) / (nn * nn * (nn - 1.0));
  const double z = (runs - mu) / std::sqrt(var);

  TestReport report;
  report.name = "runs_test";
  report.statistic = z;
  report.p_value = std::erfc(std::abs(z) / std::sqrt(2.0));
  report.parameters["runs"] = runs;
  report.parameters["n_above"] = n1;
  report.parameters["n_below"] = n2;
  return report;
}

/// Pearson dispersion: sum (obs-exp)^2/exp divided by (n - dof).
inline double dispersion(const std::vector<double>& observed,
                         const std::vector<double>& expected, std::size_t dof) {
  if (observed.size() != expected.size())
    throw Error(ErrorCode::length_mismatch, "observed/expected length mismatch");
  if (observed.size() <= dof)
    throw Error(ErrorCode::series_too_short, "not enough windows for the given dof");
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0))
      throw Error(ErrorCode::non_positive_expected,
                  "expected[" + std::to_string(i) + "] must be positive");
    const double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  return s / static_cast<double>(observed.size() - dof);
}

struct InformationCriteria {
  double aic;
  double bic;
  std::size_t free_parameters;
};

/// Free parameter count is r^2: r(r-1) transition rates plus r intensities
/// (pi is held fixed), so the increment from order r to r+1 is 2r+1.
inline InformationCriteria information_criteria(double loglik, std::size_t order,
                                                double n_obs) {
  if (order < 1) throw Error(ErrorCode::non_identifiable, "order must be >= 1");
  const double p = static_cast<double>(order * order);
  InformationCriteria ic;
  ic.free_parameters = order * order;
  ic.aic = -2.0 * loglik + 2.0 * p;
  ic.bic = -2.0 * loglik + p * std::log(n_obs);
  return ic;
}

struct ResidualSummary {
  double sum;
  double sum_abs;
  double sum_sq;
};

inline ResidualSummary residual_summary(const std::vector<double>& residuals) {
  if (residuals.empty()) throw Error(ErrorCode::length_mismatch, "empty residual series");
  ResidualSummary s{0.0, 0.0, 0.0};
  for (double e : residuals) {
    s.sum += e;
    s.sum_abs += std::abs(e);
    s.sum_sq += e * e;
  }
  return s;
}

struct OrderSelectionOptions {
  double alpha = 0.05;
  int max_order = 10;
  int start_order = 2;
  /// Pre-check for evidence of regimes on order-1 residuals; applies only
  /// when start_order == 2.
  bool evidence_check = true;
  double dispersion_threshold = 1.2;
  double runs_alpha = 0.05;
  FitOptions fit;
};

struct OrderSelectionResult {
  int chosen_order = 0;
  bool white_noise_reached = false;
  std::vector<int> orders;
  std::vector<FitResult> fits;
  std::vector<TestReport> reports;
  std::optional<double> evidence_dispersion;
  std::optional<TestReport> evidence_runs;
};

/// Iterative order selection: fit order x, test the per-window residuals for
/// white noise, and increase x until the test stops rejecting (or max_order
/// is reached, which leaves white_noise_reached false).
inline OrderSelectionResult select_order(const EventSequence& events,
                                         const ExposureStepFunction& gamma,
                                         const WindowGrid& grid,
                                         OrderSelectionOptions opts = {}) {
  if (opts.start_order < 1 || opts.max_order < opts.start_order)
    throw Error(ErrorCode::non_identifiable, "order bounds must satisfy 1 <= start <= max");

  OrderSelectionResult result;
  const std::vector<double> claims = events.claim_times();

  int start = opts.start_order;
  bool no_evidence_of_regimes = false;
  if (opts.start_order == 2 && opts.evidence_check) {
    FitResult base = fit(events, gamma, 1, std::nullopt, opts.fit);
    const std::vector<double> expected =
        expected_counts(base.params, events, base.recursion, gamma, grid);
    const std::vector<double> observed = observed_counts(claims, grid);
    std::vector<double> residuals(expected.size());
    for (std::size_t w = 0; w < expected.size(); ++w) residuals[w] = observed[w] - expected[w];

    result.evidence_dispersion = dispersion(observed, expected, 1);
    result.evidence_runs = runs_test(residuals);
    const bool evidence = *result.evidence_dispersion > opts.dispersion_threshold ||
                          result.evidence_runs->p_value < opts.runs_alpha;
    if (!evidence) {
      start = 1;  // no regimes indicated: report the null order
      no_evidence_of_regimes = true;
    }
  }

  for (int order = start; order <= opts.max_order; ++order) {
    FitResult f = fit(events, gamma, order, std::nullopt, opts.fit);
    ResidualSeries residuals = compute_residuals(f.params, events, f.recursion, gamma, grid);
    TestReport report = bartlett_b(residuals.values);

    result.orders.push_back(order);
    result.fits.push_back(std::move(f));
    result.reports.push_back(report);
    result.chosen_order = order;
    if (report.p_value >= opts.alpha) {
      result.white_noise_reached = true;
      break;
    }
    if (no_evidence_of_regimes) break;  // evidence said order 1; do not escalate
  }
  return result;
}

}  // namespace mmnpp

#endif  // MMNPP_DIAGNOSTICS_HPP
