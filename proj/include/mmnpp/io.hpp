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

#ifndef MMNPP_IO_HPP
#define MMNPP_IO_HPP

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mmnpp/calibrate.hpp"
#include "mmnpp/decode.hpp"
#include "mmnpp/events.hpp"
#include "mmnpp/exposure.hpp"
#include "mmnpp/model.hpp"

namespace mmnpp {

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

inline double parse_double(const std::string& token, const std::string& path, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorCode::parse_error,
                path + ":" + std::to_string(line) + ": not a number: '" + token + "'");
  }
  while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
  if (pos != token.size())
    throw Error(ErrorCode::parse_error,
                path + ":" + std::to_string(line) + ": trailing characters in '" + token + "'");
  return v;
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::ifstream open_for_read(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open " + path);
  return in;
}

inline std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::parse_error, "cannot write " + path);
  return out;
}

}  // namespace detail

/// Events file: CSV with header `time`, one float per row. Rows are sorted on
/// read.
inline std::vector<double> read_events_csv(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, path + ":1: missing header");
  ++lineno;
  if (detail::strip_cr(line) != "time")
    throw Error(ErrorCode::parse_error, path + ":1: expected header 'time'");
  std::vector<double> times;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    times.push_back(detail::parse_double(line, path, lineno));
  }
  std::sort(times.begin(), times.end());
  return times;
}

inline void write_events_csv(const std::string& path, const std::vector<double>& times) {
  std::ofstream out = detail::open_for_write(path);
  out << "time\n";
  for (double t : times) out << detail::format_double(t) << "\n";
}

/// Exposure file: CSV with header `start_time,value`; the horizon is supplied
/// separately.
inline ExposureStepFunction read_exposure_csv(const std::string& path, double horizon) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, path + ":1: missing header");
  ++lineno;
  if (detail::strip_cr(line) != "start_time,value")
    throw Error(ErrorCode::parse_error, path + ":1: expected header 'start_time,value'");
  std::vector<double> starts, values;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cols = detail::split_csv(line);
    if (cols.size() != 2)
      throw Error(ErrorCode::parse_error,
                  path + ":" + std::to_string(lineno) + ": expected 2 columns");
    starts.push_back(detail::parse_double(cols[0], path, lineno));
    values.push_back(detail::parse_double(cols[1], path, lineno));
  }
  try {
    return ExposureStepFunction(std::move(starts), std::move(values), horizon);
  } catch (const Error& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

inline void write_exposure_csv(const std::string& path, const ExposureStepFunction& gamma) {
  std::ofstream out = detail::open_for_write(path);
  out << "start_time,value\n";
  for (std::size_t i = 0; i < gamma.piece_starts().size(); ++i)
    out << detail::format_double(gamma.piece_starts()[i]) << ","
        << detail::format_double(gamma.piece_values()[i]) << "\n";
}

/// Model file: JSON object {"order", "Q", "lambda", "pi"}; Q row-major.
inline ModelParams read_model_json(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  try {
    const std::size_t r = j.at("order").get<std::size_t>();
    Matrix q(r, r);
    const auto& rows = j.at("Q");
    if (rows.size() != r) throw Error(ErrorCode::parse_error, "Q row count != order");
    for (std::size_t i = 0; i < r; ++i) {
      if (rows[i].size() != r) throw Error(ErrorCode::parse_error, "Q is not square");
      for (std::size_t c = 0; c < r; ++c) q(i, c) = rows[i][c].get<double>();
    }
    std::vector<double> lambda = j.at("lambda").get<std::vector<double>>();
    std::vector<double> pi = j.at("pi").get<std::vector<double>>();
    return validate_params(std::move(q), std::move(lambda), std::move(pi));
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
}

inline nlohmann::json model_to_json(const ModelParams& params) {
  const std::size_t r = params.order();
  nlohmann::json j;
  j["order"] = r;
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < r; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < r; ++c) row.push_back(params.q(i, c));
    rows.push_back(row);
  }
  j["Q"] = rows;
  j["lambda"] = params.lambda;
  j["pi"] = params.pi;
  return j;
}

inline void write_model_json(const std::string& path, const ModelParams& params) {
  std::ofstream out = detail::open_for_write(path);
  out << model_to_json(params).dump(2) << "\n";
}

inline nlohmann::json fit_report_to_json(const FitResult& result) {
  nlohmann::json j;
  j["loglik"] = result.loglik_per_iter;
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  const std::size_t r = result.params.order();
  nlohmann::json a = nlohmann::json::array();
  for (std::size_t i = 0; i < r; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < r; ++c) row.push_back(result.estimators.a_hat(i, c));
    a.push_back(row);
  }
  j["aHat"] = a;
  j["nHat"] = result.estimators.n_hat;
  j["tHat"] = result.estimators.t_hat;
  j["tStarHat"] = result.estimators.t_star_hat;
  if (!result.warnings.empty()) j["warnings"] = result.warnings;
  return j;
}

inline void write_fit_report_json(const std::string& path, const FitResult& result) {
  std::ofstream out = detail::open_for_write(path);
  out << fit_report_to_json(result).dump(2) << "\n";
}

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::parse_error, path + ": " + e.what());
  }
  return j;
}

/// Regime-path file: CSV with header `start_time,state`, states 1-based.
inline void write_regime_path_csv(const std::string& path, const RegimePath& regime_path) {
  std::ofstream out = detail::open_for_write(path);
  out << "start_time,state\n";
  for (std::size_t k = 0; k < regime_path.states.size(); ++k)
    out << detail::format_double(regime_path.times[k]) << "," << (regime_path.states[k] + 1)
        << "\n";
}

inline RegimePath read_regime_path_csv(const std::string& path, double horizon) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line) || detail::strip_cr(line) != "start_time,state")
    throw Error(ErrorCode::parse_error, path + ":1: expected header 'start_time,state'");
  ++lineno;
  RegimePath rp;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cols = detail::split_csv(line);
    if (cols.size() != 2)
      throw Error(ErrorCode::parse_error,
                  path + ":" + std::to_string(lineno) + ": expected 2 columns");
    rp.times.push_back(detail::parse_double(cols[0], path, lineno));
    rp.states.push_back(static_cast<int>(detail::parse_double(cols[1], path, lineno)) - 1);
  }
  rp.times.push_back(horizon);
  return rp;
}

/// Per-event decode file: `time,state,prob_1..prob_r`, states 1-based.
inline void write_decoded_events_csv(const std::string& path,
                                     const StateProbabilitySeries& series,
                                     const std::vector<int>& states) {
  std::ofstream out = detail::open_for_write(path);
  const std::size_t r = series.probs.empty() ? 0 : series.probs.front().size();
  out << "time,state";
  for (std::size_t i = 1; i <= r; ++i) out << ",prob_" << i;
  out << "\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out << detail::format_double(series.times[k]) << "," << (states[k] + 1);
    for (std::size_t i = 0; i < r; ++i)
      out << "," << detail::format_double(series.probs[k][i]);
    out << "\n";
  }
}

/// Per-window decode file: `window_start,observed,expected,residual`.
inline void write_windows_csv(const std::string& path, const WindowGrid& grid,
                              const std::vector<double>& observed,
                              const std::vector<double>& expected) {
  std::ofstream out = detail::open_for_write(path);
  out << "window_start,observed,expected,residual\n";
  for (std::size_t w = 0; w < grid.window_count(); ++w)
    out << detail::format_double(grid.edges[w]) << "," << detail::format_double(observed[w])
        << "," << detail::format_double(expected[w]) << ","
        << detail::format_double(observed[w] - expected[w]) << "\n";
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Generic numeric CSV reader (used by round-trip checks on decode outputs).
inline CsvTable read_csv_table(const std::string& path) {
  std::ifstream in = detail::open_for_read(path);
  std::string line;
  std::size_t lineno = 0;
  CsvTable table;
  if (!std::getline(in, line))
    throw Error(ErrorCode::parse_error, path + ":1: missing header");
  ++lineno;
  table.header = detail::split_csv(detail::strip_cr(line));
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const std::vector<std::string> cols = detail::split_csv(line);
    if (cols.size() != table.header.size())
      throw Error(ErrorCode::parse_error,
                  path + ":" + std::to_string(lineno) + ": column count mismatch");
    std::vector<double> row;
    row.reserve(cols.size());
    for (const std::string& c : cols) row.push_back(detail::parse_double(c, path, lineno));
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace mmnpp

#endif  // MMNPP_IO_HPP
