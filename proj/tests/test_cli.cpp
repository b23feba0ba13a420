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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "mmnpp/io.hpp"
#include "mmnpp/rng.hpp"
#include "support/generators.hpp"

namespace fs = std::filesystem;

namespace mmnpp {
namespace {

struct RunResult {
  int exit_code;
  std::string stderr_text;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mmnpp_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }

  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const std::string err_file = path("stderr.txt");
    const std::string cmd =
        std::string(MMNPP_CLI_PATH) + " " + args + " 2>" + err_file + " >/dev/null";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.stderr_text = ss.str();
    return r;
  }

  void write_reference_inputs(double horizon) {
    write_model_json(path("model.json"), mmnpp::testing::reference_model());
    write_exposure_csv(path("exposure.csv"),
                       mmnpp::testing::cycling_exposure(horizon, horizon / 4.0, {1.0, 1.5}));
  }

  static std::string slurp(const std::string& file) {
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

TEST_F(CliTest, SimulateIsByteIdenticalUnderFixedSeed) {
  write_reference_inputs(50.0);
  const std::string base = "simulate --model " + path("model.json") + " --exposure " +
                           path("exposure.csv") + " --horizon 50 --seed 11 --out-dir ";
  ASSERT_EQ(run(base + path("a")).exit_code, 0);
  ASSERT_EQ(run(base + path("b")).exit_code, 0);
  EXPECT_EQ(slurp(path("a/events.csv")), slurp(path("b/events.csv")));
  EXPECT_EQ(slurp(path("a/regime_path.csv")), slurp(path("b/regime_path.csv")));
  EXPECT_FALSE(slurp(path("a/events.csv")).empty());
}

TEST_F(CliTest, SimulateZeroHorizonWritesValidHeaders) {
  write_reference_inputs(50.0);
  const RunResult r = run("simulate --model " + path("model.json") + " --exposure " +
                          path("exposure.csv") + " --horizon 0 --out-dir " + path("out"));
  ASSERT_EQ(r.exit_code, 0);
  EXPECT_EQ(slurp(path("out/events.csv")), "time\n");
  EXPECT_EQ(slurp(path("out/regime_path.csv")), "start_time,state\n");
  EXPECT_TRUE(read_events_csv(path("out/events.csv")).empty());
}

TEST_F(CliTest, FitConvergesAndOutputsRoundTrip) {
  write_reference_inputs(60.0);
  ASSERT_EQ(run("simulate --model " + path("model.json") + " --exposure " +
                path("exposure.csv") + " --horizon 60 --seed 3 --out-dir " + path("sim"))
                .exit_code,
            0);
  const RunResult r = run("fit --events " + path("sim/events.csv") + " --exposure " +
                          path("exposure.csv") +
                          " --horizon 60 --order 2 --tol 1e-3 --out-dir " + path("fit"));
  EXPECT_EQ(r.exit_code, 0);

  // outputs parse back through the library's own readers
  const ModelParams fitted = read_model_json(path("fit/fitted_model.json"));
  EXPECT_EQ(fitted.order(), 2u);
  const nlohmann::json report = read_json(path("fit/fit_report.json"));
  EXPECT_TRUE(report.at("converged").get<bool>());
  EXPECT_GT(report.at("iterations").get<int>(), 0);
  const auto loglik = report.at("loglik").get<std::vector<double>>();
  for (std::size_t i = 1; i < loglik.size(); ++i)
    EXPECT_GE(loglik[i] - loglik[i - 1], -1e-8);
}

TEST_F(CliTest, RefitOnOwnOutputConvergesImmediately) {
  write_reference_inputs(60.0);
  ASSERT_EQ(run("simulate --model " + path("model.json") + " --exposure " +
                path("exposure.csv") + " --horizon 60 --seed 5 --out-dir " + path("sim"))
                .exit_code,
            0);
  ASSERT_EQ(run("fit --events " + path("sim/events.csv") + " --exposure " +
                path("exposure.csv") + " --horizon 60 --order 2 --tol 1e-4 --out-dir " +
                path("fit1"))
                .exit_code,
            0);
  const RunResult r = run("fit --events " + path("sim/events.csv") + " --exposure " +
                          path("exposure.csv") + " --horizon 60 --order 2 --tol 1e-4 --init " +
                          path("fit1/fitted_model.json") + " --out-dir " + path("fit2"));
  EXPECT_EQ(r.exit_code, 0);
  const nlohmann::json report = read_json(path("fit2/fit_report.json"));
  EXPECT_LE(report.at("iterations").get<int>(), 2);
}

TEST_F(CliTest, FitRejectsOrderBeyondEventCount) {
  write_reference_inputs(50.0);
  write_events_csv(path("events.csv"), {1.0, 2.0});
  const RunResult r = run("fit --events " + path("events.csv") + " --exposure " +
                          path("exposure.csv") + " --horizon 50 --order 5 --out-dir " +
                          path("out"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.stderr_text.find("NonIdentifiable"), std::string::npos);
}

TEST_F(CliTest, DecodeOrderOneLabelsEverythingStateOne) {
  Matrix q(1, 1);
  write_model_json(path("m1.json"), validate_params(q, {5.0}, {1.0}));
  write_exposure_csv(path("exposure.csv"), ExposureStepFunction::constant(1.0, 20.0));
  write_events_csv(path("events.csv"), {0.5, 3.0, 7.7, 15.0});
  const RunResult r = run("decode --model " + path("m1.json") + " --events " +
                          path("events.csv") + " --exposure " + path("exposure.csv") +
                          " --horizon 20 --window 4 --out-dir " + path("out"));
  ASSERT_EQ(r.exit_code, 0);
  const CsvTable table = read_csv_table(path("out/decoded_events.csv"));
  ASSERT_EQ(table.header.size(), 3u);  // time,state,prob_1
  for (const std::vector<double>& row : table.rows) {
    EXPECT_EQ(row[1], 1.0);
    EXPECT_EQ(row[2], 1.0);
  }
  const CsvTable windows = read_csv_table(path("out/windows.csv"));
  EXPECT_EQ(windows.rows.size(), 5u);
}

TEST_F(CliTest, DecodeMissingExposureFileIsUsageError) {
  write_reference_inputs(50.0);
  write_events_csv(path("events.csv"), {1.0});
  const RunResult r = run("decode --model " + path("model.json") + " --events " +
                          path("events.csv") + " --exposure " + path("nope.csv") +
                          " --horizon 50 --out-dir " + path("out"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.stderr_text.find("ParseError"), std::string::npos);
}

TEST_F(CliTest, DiagnoseEmptyEventsIsError) {
  write_reference_inputs(50.0);
  write_events_csv(path("events.csv"), {});
  const RunResult r = run("diagnose --model " + path("model.json") + " --events " +
                          path("events.csv") + " --exposure " + path("exposure.csv") +
                          " --horizon 50 --out-dir " + path("out"));
  EXPECT_EQ(r.exit_code, 2);
}

TEST_F(CliTest, DiagnoseWritesFullReport) {
  write_reference_inputs(80.0);
  ASSERT_EQ(run("simulate --model " + path("model.json") + " --exposure " +
                path("exposure.csv") + " --horizon 80 --seed 17 --out-dir " + path("sim"))
                .exit_code,
            0);
  const RunResult r = run("diagnose --model " + path("model.json") + " --events " +
                          path("sim/events.csv") + " --exposure " + path("exposure.csv") +
                          " --horizon 80 --window 1 --lags 10 20 --out-dir " + path("out"));
  ASSERT_EQ(r.exit_code, 0);
  const nlohmann::json report = read_json(path("out/diagnosis.json"));
  for (const char* key : {"residual_sum", "residual_sum_abs", "residual_sum_sq", "runs_test",
                          "bartlett_b", "dispersion", "aic", "bic", "ljung_box"})
    EXPECT_TRUE(report.contains(key)) << key;
  for (const auto& entry : report.at("ljung_box")) {
    const double p = entry.at("p_value").get<double>();
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST_F(CliTest, SelectOrderOnNhppData) {
  const double horizon = 150.0;
  const ExposureStepFunction gamma({0.0, 60.0}, {1.0, 1.3}, horizon);
  write_exposure_csv(path("exposure.csv"), gamma);
  Rng rng(1001);
  std::vector<double> claims;
  double rho = rng.exponential(5.0);
  while (rho < gamma.total_operational_time()) {
    claims.push_back(gamma.inverse_operational_time(rho));
    rho += rng.exponential(5.0);
  }
  write_events_csv(path("events.csv"), claims);
  const RunResult r = run("select-order --events " + path("events.csv") + " --exposure " +
                          path("exposure.csv") +
                          " --horizon 150 --window 2 --start-order 1 --no-evidence-check "
                          "--out-dir " +
                          path("out"));
  ASSERT_EQ(r.exit_code, 0);
  const nlohmann::json report = read_json(path("out/order_selection.json"));
  EXPECT_EQ(report.at("chosen_order").get<int>(), 1);
  EXPECT_TRUE(report.at("white_noise_reached").get<bool>());
  const ModelParams chosen = read_model_json(path("out/chosen_model.json"));
  EXPECT_EQ(chosen.order(), 1u);
}

}  // namespace
}  // namespace mmnpp
