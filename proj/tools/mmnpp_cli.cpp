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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmnpp/mmnpp.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 numerical failure, 2 usage/IO.
constexpr int kExitNumerical = 1;
constexpr int kExitUsage = 2;

struct CommonInputs {
  std::string events_path;
  std::string exposure_path;
  std::string model_path;
  std::string out_dir = ".";
  double horizon = 0.0;
  double window = 1.0;
  bool spread_daily = false;
  int threads = 1;
};

/// Distributes same-day event counts at equal intra-day intervals: k events
/// on day d land at d + (i - 1/2)/k.
std::vector<double> spread_daily_times(const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  std::size_t i = 0;
  while (i < times.size()) {
    const double day = std::floor(times[i]);
    std::size_t j = i;
    while (j < times.size() && std::floor(times[j]) == day) ++j;
    const std::size_t k = j - i;
    for (std::size_t m = 0; m < k; ++m)
      out.push_back(day + (static_cast<double>(m) + 0.5) / static_cast<double>(k));
    i = j;
  }
  return out;
}

std::vector<double> load_claims(const CommonInputs& in) {
  std::vector<double> claims = mmnpp::read_events_csv(in.events_path);
  if (in.spread_daily) claims = spread_daily_times(claims);
  return claims;
}

json test_report_to_json(const mmnpp::TestReport& report) {
  json j;
  j["name"] = report.name;
  j["statistic"] = report.statistic;
  j["p_value"] = report.p_value;
  for (const auto& [key, value] : report.parameters) j[key] = value;
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw mmnpp::Error(mmnpp::ErrorCode::parse_error, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

int cmd_simulate(const CommonInputs& in, std::uint64_t seed) {
  fs::create_directories(in.out_dir);
  const fs::path events_file = fs::path(in.out_dir) / "events.csv";
  const fs::path path_file = fs::path(in.out_dir) / "regime_path.csv";
  const fs::path manifest_file = fs::path(in.out_dir) / "manifest.json";

  json manifest;
  manifest["command"] = "simulate";
  manifest["model"] = in.model_path;
  manifest["exposure"] = in.exposure_path;
  manifest["horizon"] = in.horizon;
  manifest["seed"] = seed;
  manifest["outputs"] = {{"events", events_file.string()},
                         {"regime_path", path_file.string()}};

  if (in.horizon == 0.0) {  // degenerate run: valid headers, no rows
    mmnpp::write_events_csv(events_file.string(), {});
    std::ofstream out(path_file);
    out << "start_time,state\n";
    write_json_file(manifest_file, manifest);
    return 0;
  }

  const mmnpp::ModelParams params = mmnpp::read_model_json(in.model_path);
  const mmnpp::ExposureStepFunction gamma =
      mmnpp::read_exposure_csv(in.exposure_path, in.horizon);
  const mmnpp::SimulationConfig config{params, gamma, in.horizon, seed};
  const mmnpp::SimulationResult sim = mmnpp::simulate_mmnpp(config);

  mmnpp::write_events_csv(events_file.string(), sim.claim_times);
  mmnpp::write_regime_path_csv(path_file.string(), sim.path);
  manifest["claims"] = sim.claim_times.size();
  manifest["jittered_ties"] = sim.jitter_count;
  write_json_file(manifest_file, manifest);
  return 0;
}

int cmd_fit(const CommonInputs& in, int order, const std::string& init_path,
            mmnpp::FitOptions opts) {
  fs::create_directories(in.out_dir);
  const mmnpp::ExposureStepFunction gamma =
      mmnpp::read_exposure_csv(in.exposure_path, in.horizon);
  const mmnpp::EventSequence events = mmnpp::build_event_sequence(load_claims(in), gamma);

  std::optional<mmnpp::ModelParams> init;
  if (!init_path.empty()) init = mmnpp::read_model_json(init_path);

  const mmnpp::FitResult result = mmnpp::fit(events, gamma, order, init, opts);
  mmnpp::write_model_json((fs::path(in.out_dir) / "fitted_model.json").string(),
                          result.params);
  mmnpp::write_fit_report_json((fs::path(in.out_dir) / "fit_report.json").string(), result);
  for (const std::string& w : result.warnings) std::cerr << "warning: " << w << "\n";
  return result.converged ? 0 : kExitNumerical;
}

int cmd_decode(const CommonInputs& in) {
  fs::create_directories(in.out_dir);
  const mmnpp::ModelParams params = mmnpp::read_model_json(in.model_path);
  const mmnpp::ExposureStepFunction gamma =
      mmnpp::read_exposure_csv(in.exposure_path, in.horizon);
  const std::vector<double> claims = load_claims(in);
  const mmnpp::EventSequence events = mmnpp::build_event_sequence(claims, gamma);

  const mmnpp::RecursionState rec = mmnpp::forward_backward(params, events);
  const mmnpp::StateProbabilitySeries series = mmnpp::smoothed_probs(events, rec);
  const std::vector<int> states = mmnpp::most_likely_regimes(series);
  mmnpp::write_decoded_events_csv((fs::path(in.out_dir) / "decoded_events.csv").string(),
                                  series, states);

  const mmnpp::WindowGrid grid = mmnpp::make_window_grid(in.horizon, in.window);
  const std::vector<double> expected =
      mmnpp::expected_counts(params, events, rec, gamma, grid);
  const std::vector<double> observed = mmnpp::observed_counts(claims, grid);
  mmnpp::write_windows_csv((fs::path(in.out_dir) / "windows.csv").string(), grid, observed,
                           expected);
  return 0;
}

int cmd_select_order(const CommonInputs& in, mmnpp::OrderSelectionOptions opts) {
  fs::create_directories(in.out_dir);
  const mmnpp::ExposureStepFunction gamma =
      mmnpp::read_exposure_csv(in.exposure_path, in.horizon);
  const mmnpp::EventSequence events = mmnpp::build_event_sequence(load_claims(in), gamma);
  const mmnpp::WindowGrid grid = mmnpp::make_window_grid(in.horizon, in.window);

  const mmnpp::OrderSelectionResult result = mmnpp::select_order(events, gamma, grid, opts);

  json report;
  report["chosen_order"] = result.chosen_order;
  report["white_noise_reached"] = result.white_noise_reached;
  if (result.evidence_dispersion) report["evidence_dispersion"] = *result.evidence_dispersion;
  if (result.evidence_runs) report["evidence_runs"] = test_report_to_json(*result.evidence_runs);
  json orders = json::array();
  for (std::size_t i = 0; i < result.orders.size(); ++i) {
    json entry;
    entry["order"] = result.orders[i];
    entry["white_noise_test"] = test_report_to_json(result.reports[i]);
    entry["fit_report"] = mmnpp::fit_report_to_json(result.fits[i]);
    orders.push_back(entry);
  }
  report["orders"] = orders;
  write_json_file(fs::path(in.out_dir) / "order_selection.json", report);

  if (!result.fits.empty())
    mmnpp::write_model_json((fs::path(in.out_dir) / "chosen_model.json").string(),
                            result.fits.back().params);
  if (!result.white_noise_reached)
    std::cerr << "warning: residuals were not white noise at the maximum order\n";
  return 0;
}

int cmd_diagnose(const CommonInputs& in, const std::vector<std::size_t>& lags) {
  fs::create_directories(in.out_dir);
  const mmnpp::ModelParams params = mmnpp::read_model_json(in.model_path);
  const mmnpp::ExposureStepFunction gamma =
      mmnpp::read_exposure_csv(in.exposure_path, in.horizon);
  const std::vector<double> claims = load_claims(in);
  if (claims.empty())
    throw mmnpp::Error(mmnpp::ErrorCode::non_identifiable, "no events to diagnose");
  const mmnpp::EventSequence events = mmnpp::build_event_sequence(claims, gamma);

  const mmnpp::RecursionState rec = mmnpp::forward_backward(params, events);
  const mmnpp::WindowGrid grid = mmnpp::make_window_grid(in.horizon, in.window);
  const mmnpp::ResidualSeries residuals =
      mmnpp::compute_residuals(params, events, rec, gamma, grid);
  const std::vector<double> observed = mmnpp::observed_counts(claims, grid);
  std::vector<double> expected(observed.size());
  for (std::size_t w = 0; w < observed.size(); ++w)
    expected[w] = observed[w] - residuals.values[w];

  json report;
  report["order"] = params.order();
  report["n_windows"] = grid.window_count();
  const mmnpp::ResidualSummary summary = mmnpp::residual_summary(residuals.values);
  report["residual_sum"] = summary.sum;
  report["residual_sum_abs"] = summary.sum_abs;
  report["residual_sum_sq"] = summary.sum_sq;

  json lb = json::array();
  for (std::size_t lag : lags) {
    if (residuals.values.size() <= lag) {
      lb.push_back({{"lag", lag}, {"skipped", "series shorter than lag"}});
      continue;
    }
    lb.push_back(test_report_to_json(mmnpp::ljung_box(residuals.values, lag)));
  }
  report["ljung_box"] = lb;
  report["runs_test"] = test_report_to_json(mmnpp::runs_test(residuals.values));
  report["bartlett_b"] = test_report_to_json(mmnpp::bartlett_b(residuals.values));
  report["dispersion"] =
      mmnpp::dispersion(observed, expected, params.order() * params.order());

  const double loglik = mmnpp::log_likelihood(rec);
  report["loglik"] = loglik;
  const mmnpp::InformationCriteria ic = mmnpp::information_criteria(
      loglik, params.order(), static_cast<double>(events.claim_count()));
  report["aic"] = ic.aic;
  report["bic"] = ic.bic;

  write_json_file(fs::path(in.out_dir) / "diagnosis.json", report);
  mmnpp::write_windows_csv((fs::path(in.out_dir) / "residuals.csv").string(), grid, observed,
                           expected);
  return 0;
}

int error_exit(const mmnpp::Error& e) {
  json err;
  err["error"] = e.code_name();
  err["message"] = e.what();
  std::cerr << err.dump() << "\n";
  switch (e.code()) {
    case mmnpp::ErrorCode::parse_error:
    case mmnpp::ErrorCode::non_identifiable:
      return kExitUsage;
    default:
      return kExitNumerical;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov-modulated non-homogeneous Poisson processes: simulation, "
               "EM calibration, regime decoding, and residual diagnostics"};
  app.require_subcommand(1);

  CommonInputs in;
  std::uint64_t seed = 0;
  int order = 2;
  std::string init_path;
  mmnpp::FitOptions fit_opts;
  mmnpp::OrderSelectionOptions sel_opts;
  std::vector<std::size_t> lags{91, 182, 365};

  CLI::App* sim = app.add_subcommand("simulate", "simulate an MMNPP and write events/path CSVs");
  sim->add_option("--model", in.model_path, "model JSON")->required();
  sim->add_option("--exposure", in.exposure_path, "exposure CSV")->required();
  sim->add_option("--horizon", in.horizon, "observation horizon")->required();
  sim->add_option("--seed", seed, "RNG seed (all sub-streams derive from it)");
  sim->add_option("--out-dir", in.out_dir, "output directory");

  CLI::App* fit_cmd = app.add_subcommand("fit", "calibrate by the scaled EM algorithm");
  fit_cmd->add_option("--events", in.events_path, "events CSV")->required();
  fit_cmd->add_option("--exposure", in.exposure_path, "exposure CSV")->required();
  fit_cmd->add_option("--horizon", in.horizon, "observation horizon")->required();
  fit_cmd->add_option("--order", order, "number of regimes")->required();
  fit_cmd->add_option("--init", init_path, "initial model JSON (default: data-driven)");
  fit_cmd->add_option("--tol", fit_opts.tol_loglik, "log-likelihood stopping tolerance");
  fit_cmd->add_option("--max-iter", fit_opts.max_iter, "EM iteration cap");
  fit_cmd->add_option("--threads", fit_opts.threads, "E-step worker cap");
  fit_cmd->add_flag("--spread-daily", in.spread_daily,
                    "spread same-day events at equal intra-day intervals");
  fit_cmd->add_option("--out-dir", in.out_dir, "output directory");

  CLI::App* dec = app.add_subcommand("decode", "regime probabilities and expected counts");
  dec->add_option("--model", in.model_path, "fitted model JSON")->required();
  dec->add_option("--events", in.events_path, "events CSV")->required();
  dec->add_option("--exposure", in.exposure_path, "exposure CSV")->required();
  dec->add_option("--horizon", in.horizon, "observation horizon")->required();
  dec->add_option("--window", in.window, "residual window width");
  dec->add_flag("--spread-daily", in.spread_daily,
                "spread same-day events at equal intra-day intervals");
  dec->add_option("--out-dir", in.out_dir, "output directory");

  CLI::App* sel = app.add_subcommand("select-order", "iterative white-noise order selection");
  sel->add_option("--events", in.events_path, "events CSV")->required();
  sel->add_option("--exposure", in.exposure_path, "exposure CSV")->required();
  sel->add_option("--horizon", in.horizon, "observation horizon")->required();
  sel->add_option("--window", in.window, "residual window width");
  sel->add_option("--alpha", sel_opts.alpha, "white-noise p-value threshold");
  sel->add_option("--max-order", sel_opts.max_order, "largest order to try");
  sel->add_option("--start-order", sel_opts.start_order, "first order to try");
  sel->add_flag("--no-evidence-check{false}", sel_opts.evidence_check,
                "skip the evidence-of-regimes pre-check");
  sel->add_option("--tol", sel_opts.fit.tol_loglik, "per-order fit tolerance");
  sel->add_option("--max-iter", sel_opts.fit.max_iter, "per-order EM iteration cap");
  sel->add_option("--threads", sel_opts.fit.threads, "E-step worker cap");
  sel->add_flag("--spread-daily", in.spread_daily,
                "spread same-day events at equal intra-day intervals");
  sel->add_option("--out-dir", in.out_dir, "output directory");

  CLI::App* diag = app.add_subcommand("diagnose", "residual statistics for a fitted model");
  diag->add_option("--model", in.model_path, "fitted model JSON")->required();
  diag->add_option("--events", in.events_path, "events CSV")->required();
  diag->add_option("--exposure", in.exposure_path, "exposure CSV")->required();
  diag->add_option("--horizon", in.horizon, "observation horizon")->required();
  diag->add_option("--window", in.window, "residual window width");
  diag->add_option("--lags", lags, "Ljung-Box lags");
  diag->add_flag("--spread-daily", in.spread_daily,
                 "spread same-day events at equal intra-day intervals");
  diag->add_option("--out-dir", in.out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (sim->parsed()) return cmd_simulate(in, seed);
    if (fit_cmd->parsed()) return cmd_fit(in, order, init_path, fit_opts);
    if (dec->parsed()) return cmd_decode(in);
    if (sel->parsed()) return cmd_select_order(in, sel_opts);
    if (diag->parsed()) return cmd_diagnose(in, lags);
  } catch (const mmnpp::Error& e) {
    return error_exit(e);
  } catch (const std::exception& e) {
    std::cerr << R"({"error":"Internal","message":")" << e.what() << "\"}\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
