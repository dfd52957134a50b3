// Copyright 2026 The hilqr Authors
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

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hilqr/extensions.hpp"
#include "hilqr/gains.hpp"
#include "hilqr/ilqr.hpp"
#include "hilqr/mpc.hpp"
#include "hilqr/simulator.hpp"

namespace hilqr::io {

using json = nlohmann::json;

// 17 significant digits round-trip every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

inline Vector vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw InvalidArgument("expected a matrix as a list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Vector row = vector_from_json(j[r]);
    if (row.size() != cols) throw InvalidArgument("ragged matrix rows");
    m.row(r) = row.transpose();
  }
  return m;
}

// Columns: t, mode, x0..x{n-1}, u0..u{m-1}. The last knot has no input and
// leaves the u cells empty.
inline void write_trajectory_csv(std::ostream& out, const HybridTrajectory& traj) {
  const std::size_t n = traj.states.empty() ? 0 : static_cast<std::size_t>(traj.states[0].size());
  const std::size_t m = traj.inputs.empty() ? 0 : static_cast<std::size_t>(traj.inputs[0].size());
  out << "t,mode";
  for (std::size_t i = 0; i < n; ++i) out << ",x" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",u" << i;
  out << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    out << format_double(traj.time(k)) << ',' << traj.modes[k].value;
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_double(traj.states[k][i]);
    for (std::size_t i = 0; i < m; ++i) {
      out << ',';
      if (k < traj.inputs.size()) out << format_double(traj.inputs[k][i]);
    }
    out << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

/// Reads knots written by write_trajectory_csv. Events are not part of the
/// CSV; attach them with events_from_json.
inline HybridTrajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trajectory csv: empty input");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "mode") {
    throw InvalidArgument("trajectory csv: header must start with t,mode");
  }
  std::size_t n = 0;
  std::size_t m = 0;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i] == "x" + std::to_string(n) && m == 0) {
      ++n;
    } else if (header[i] == "u" + std::to_string(m)) {
      ++m;
    } else {
      throw InvalidArgument("trajectory csv: unexpected column '" + header[i] + "'");
    }
  }
  HybridTrajectory traj;
  std::vector<double> times;
  std::size_t row = 1;
  bool ended = false;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    if (ended) throw InvalidArgument("trajectory csv: row after the input-free last row");
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != 2 + n + m) {
      throw InvalidArgument("trajectory csv: row " + std::to_string(row) + " has " +
                            std::to_string(cells.size()) + " cells");
    }
    try {
      times.push_back(std::stod(cells[0]));
      traj.modes.push_back(ModeId{static_cast<std::size_t>(std::stoul(cells[1]))});
      Vector x(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) x[i] = std::stod(cells[2 + i]);
      traj.states.push_back(std::move(x));
      if (m > 0 && cells[2 + n].empty()) {
        ended = true;
      } else {
        Vector u(static_cast<Eigen::Index>(m));
        for (std::size_t i = 0; i < m; ++i) u[i] = std::stod(cells[2 + n + i]);
        traj.inputs.push_back(std::move(u));
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("trajectory csv: unparsable number in row " + std::to_string(row));
    }
  }
  if (times.empty()) throw InvalidArgument("trajectory csv: no rows");
  if (m > 0 && !ended) throw InvalidArgument("trajectory csv: last row must have empty inputs");
  traj.t0 = times.front();
  traj.dt = times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1) : 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (std::abs(times[k] - traj.time(k)) > 1e-9 * std::max(1.0, std::abs(times[k]))) {
      throw InvalidArgument("trajectory csv: times are not uniformly spaced");
    }
  }
  return traj;
}

inline json event_to_json(std::size_t knot, const EventRecord& r) {
  return {{"knot", knot},
          {"source", r.transition.source.value},
          {"target", r.transition.target.value},
          {"event_time", r.event_time},
          {"x_pre", to_json(r.x_pre)},
          {"x_post", to_json(r.x_post)},
          {"dt1", r.dt1},
          {"dt2", r.dt2},
          {"saltation", to_json(r.saltation)}};
}

inline json events_to_json(const HybridTrajectory& traj) {
  json out = json::array();
  for (const TrajectoryEvent& ev : traj.events) out.push_back(event_to_json(ev.knot, ev.record));
  return out;
}

inline void events_from_json(const json& j, const HybridSystem& sys, HybridTrajectory& traj) {
  if (!j.is_array()) throw InvalidArgument("events: expected a list");
  traj.events.clear();
  for (const json& e : j) {
    TrajectoryEvent ev;
    ev.knot = e.at("knot").get<std::size_t>();
    if (ev.knot >= traj.horizon()) throw InvalidArgument("events: knot out of range");
    EventRecord& r = ev.record;
    r.transition = {ModeId{e.at("source").get<std::size_t>()}, ModeId{e.at("target").get<std::size_t>()}};
    r.transition_index = sys.transition_index(r.transition);
    r.event_time = e.at("event_time").get<double>();
    r.x_pre = vector_from_json(e.at("x_pre"));
    r.x_post = vector_from_json(e.at("x_post"));
    r.dt1 = e.at("dt1").get<double>();
    r.dt2 = e.at("dt2").get<double>();
    r.saltation = e.contains("saltation")
                      ? matrix_from_json(e.at("saltation"))
                      : saltation_matrix(sys, r.transition_index, r.event_time, r.x_pre,
                                         traj.inputs[ev.knot])
                            .matrix;
    if (!traj.events.empty() && traj.events.back().knot >= ev.knot) {
      throw InvalidArgument("events: knots must be strictly increasing");
    }
    traj.events.push_back(std::move(ev));
  }
}

inline json extensions_to_json(const std::vector<ReferenceExtension>& exts) {
  json out = json::array();
  for (const ReferenceExtension& e : exts) {
    json pre = json::array();
    json post = json::array();
    for (const Vector& x : e.pre_states) pre.push_back(to_json(x));
    for (const Vector& x : e.post_states) post.push_back(to_json(x));
    out.push_back({{"event_knot", e.event_knot},
                   {"pre_mode", e.pre_mode.value},
                   {"post_mode", e.post_mode.value},
                   {"event_time", e.event_time},
                   {"input", to_json(e.input)},
                   {"horizon", e.horizon},
                   {"pre_states", pre},
                   {"post_states", post}});
  }
  return out;
}

inline json gains_to_json(const GainSchedule& g) {
  json u_ff = json::array();
  json K = json::array();
  for (const Vector& v : g.u_ff) u_ff.push_back(to_json(v));
  for (const Matrix& k : g.K) K.push_back(to_json(k));
  return {{"dJ_linear", g.dJ_linear},
          {"dJ_quadratic", g.dJ_quadratic},
          {"regularization", g.regularization},
          {"u_ff", u_ff},
          {"K", K}};
}

inline json report_to_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"final_cost", r.final_cost},
          {"final_expected_reduction", r.final_expected_reduction},
          {"cost_history", r.cost_history},
          {"expected_reduction_history", r.expected_reduction_history},
          {"regularization_history", r.regularization_history},
          {"accepted_alphas", r.accepted_alphas},
          {"message", r.message}};
}

// Columns: t, mode, x.., u.., converged, iterations, expected_reduction.
// Wall-clock solve times go to a separate file so the log is reproducible.
inline void write_mpc_log_csv(std::ostream& out, const MpcLog& log) {
  if (log.rows.empty()) return;
  const auto n = log.rows.front().x.size();
  const auto m = log.rows.front().u.size();
  out << "t,mode";
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << i;
  for (Eigen::Index i = 0; i < m; ++i) out << ",u" << i;
  out << ",converged,iterations,expected_reduction\n";
  for (const MpcLogRow& r : log.rows) {
    out << format_double(r.t) << ',' << r.mode.value;
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(r.x[i]);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_double(r.u[i]);
    out << ',' << (r.converged ? 1 : 0) << ',' << r.iterations << ','
        << format_double(r.expected_reduction) << '\n';
  }
}

inline void write_mpc_timing_csv(std::ostream& out, const MpcLog& log) {
  out << "t,solve_ms\n";
  for (const MpcLogRow& r : log.rows) out << format_double(r.t) << ',' << format_double(r.solve_ms) << '\n';
}

inline json summary_to_json(const MpcSummary& s) {
  return {{"n_steps", s.n_steps},
          {"n_nonconverged", s.n_nonconverged},
          {"max_tracking_error", s.max_tracking_error},
          {"mean_iterations", s.mean_iterations},
          {"mean_solve_ms", s.mean_solve_ms},
          {"peak_input", s.peak_input},
          {"final_state", s.final_state.size() ? to_json(s.final_state) : json::array()}};
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace hilqr::io
