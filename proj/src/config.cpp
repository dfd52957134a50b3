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

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hilqr::app {
namespace {

using json = nlohmann::json;

// Typed access to one JSON object that remembers its path for diagnostics
// and rejects keys nobody asked about.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  // Call after reading every field.
  void done() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(field(key), "unknown field");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::optional<Section> section(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return std::optional<Section>(std::in_place, j_.at(key), field(key));
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(field(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(field(key), "must be finite");
  }

  void positive(const std::string& key, double& out) {
    number(key, out);
    if (has(key) && !(out > 0.0)) fail(field(key), "must be positive");
  }

  void count(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(field(key), "expected a nonnegative integer");
    out = v.get<std::size_t>();
  }

  void optional_count(const std::string& key, std::optional<std::size_t>& out) {
    if (!has(key)) return;
    std::size_t v = 0;
    count(key, v);
    out = v;
  }

  void flag(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(field(key), "expected true or false");
    out = v.get<bool>();
  }

  void text(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(field(key), "expected a string");
    out = v.get<std::string>();
  }

  void numbers(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(field(key), "expected a list of numbers");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) fail(field(key) + "[" + std::to_string(i) + "]", "must be finite");
    }
  }

  void vector(const std::string& key, Vector& out, std::size_t size) {
    if (!has(key)) return;
    std::vector<double> v;
    numbers(key, v);
    if (v.size() != size) {
      fail(field(key), "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
    }
    out = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  // A diagonal weight given as its diagonal entries.
  void diagonal(const std::string& key, Matrix& out, std::size_t size, bool definite) {
    if (!has(key)) return;
    Vector d;
    vector(key, d, size);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      if (definite ? !(d[i] > 0.0) : d[i] < 0.0) {
        fail(field(key), definite ? "entries must be positive" : "entries must be nonnegative");
      }
    }
    out = d.asDiagonal();
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config field '" + where + "': " + what);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.weights.Q_rate = Vector{{1.0, 1.0}}.asDiagonal();
  c.weights.R_rate = Matrix::Constant(1, 1, 1e-4);
  c.weights.Q_terminal = Vector{{10.0, 10.0}}.asDiagonal();
  return c;
}

PerturbationSpec parse_perturbation(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("--perturb expects <component>:<magnitude>");
  const std::string comp = text.substr(0, colon);
  const std::string mag = text.substr(colon + 1);
  PerturbationSpec p;
  if (comp == "z") {
    p.component = 0;
  } else if (comp == "zdot") {
    p.component = 1;
  } else {
    std::size_t used = 0;
    try {
      p.component = std::stoul(comp, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != comp.size() || comp.empty() || p.component > 1) {
      throw ConfigError("--perturb: unknown component '" + comp + "' (use z, zdot, 0 or 1)");
    }
  }
  std::size_t used = 0;
  try {
    p.magnitude = std::stod(mag, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  if (used != mag.size() || mag.empty() || !std::isfinite(p.magnitude)) {
    throw ConfigError("--perturb: bad magnitude '" + mag + "'");
  }
  return p;
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig c = default_config();
  {
    Section root(doc, "");
    if (auto s = root.section("system")) {
      s->positive("mass", c.system.mass);
      s->positive("gravity", c.system.gravity);
      s->number("restitution", c.system.restitution);
      if (!(c.system.restitution > 0.0 && c.system.restitution <= 1.0)) {
        Section::fail("system.restitution", "must lie in (0, 1]");
      }
      s->done();
    }
    if (auto s = root.section("simulate")) {
      s->vector("x0", c.simulate.x0, 2);
      if (s->has("mode0")) {
        std::size_t m = 0;
        s->count("mode0", m);
        if (m > 1) Section::fail("simulate.mode0", "must be 0 (falling) or 1 (rising)");
        c.simulate.mode0 = m;
      }
      s->positive("duration", c.simulate.duration);
      s->positive("dt", c.simulate.dt);
      s->number("input", c.simulate.input);
      s->numbers("inputs", c.simulate.inputs);
      s->done();
    }
    if (auto s = root.section("reference")) {
      s->vector("start", c.reference.start, 2);
      s->vector("goal", c.reference.goal, 2);
      s->positive("duration", c.reference.duration);
      s->positive("dt", c.reference.dt);
      s->diagonal("terminal_weight", c.reference.weights.Q_terminal, 2, false);
      s->number("state_rate", c.reference.weights.state_rate);
      s->positive("input_rate", c.reference.weights.input_rate);
      if (c.reference.weights.state_rate < 0.0) Section::fail("reference.state_rate", "must be nonnegative");
      s->count("max_iterations", c.reference.max_iterations);
      s->positive("threshold", c.reference.threshold);
      s->positive("goal_tolerance", c.reference.goal_tolerance);
      s->text("trajectory", c.reference.trajectory);
      s->text("events", c.reference.events);
      s->optional_count("extension_horizon", c.reference.extension_horizon);
      if (c.reference.max_iterations == 0) Section::fail("reference.max_iterations", "must be positive");
      s->done();
    }
    if (auto s = root.section("mpc")) {
      s->count("horizon", c.mpc.horizon);
      s->positive("threshold", c.mpc.convergence_threshold);
      s->count("max_iterations", c.mpc.max_iterations);
      s->count("line_search_width", c.mpc.line_search_width);
      s->optional_count("extension_horizon", c.mpc.extension_horizon);
      s->flag("warm_start", c.mpc.warm_start);
      s->flag("seed_reference", c.mpc.seed_reference);
      s->flag("parallel", c.mpc.parallel);
      if (auto w = s->section("weights")) {
        w->diagonal("Q_rate", c.weights.Q_rate, 2, false);
        w->diagonal("R_rate", c.weights.R_rate, 1, true);
        w->diagonal("Q_terminal", c.weights.Q_terminal, 2, false);
        w->done();
      }
      try {
        c.mpc.validate();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("config section 'mpc': ") + e.what());
      }
      s->done();
    }
    if (auto s = root.section("ablation")) {
      s->flag("cost_update", c.mpc.cost_update);
      s->flag("saltation", c.mpc.saltation);
      s->done();
    }
    if (auto s = root.section("perturbation")) {
      if (s->has("component")) {
        std::string comp;
        s->text("component", comp);
        const double magnitude = c.perturbation.magnitude;
        c.perturbation = parse_perturbation(comp + ":0");
        c.perturbation.magnitude = magnitude;
      }
      s->number("magnitude", c.perturbation.magnitude);
      s->done();
    }
    if (auto s = root.section("check")) {
      s->count("samples", c.check.samples);
      s->text("fault_injection", c.check.fault_injection);
      if (!c.check.fault_injection.empty() && c.check.fault_injection != "oracle_restitution") {
        Section::fail("check.fault_injection", "unknown fault '" + c.check.fault_injection + "'");
      }
      if (c.check.samples == 0) Section::fail("check.samples", "must be positive");
      s->done();
    }
    if (root.has("seed")) {
      std::size_t seed = 0;
      root.count("seed", seed);
      c.seed = seed;
    }
    root.text("output", c.output);
    root.done();
  }
  c.mpc.dt = c.reference.dt;
  if (c.reference.trajectory.empty() != c.reference.events.empty()) {
    Section::fail("reference.events", "trajectory and events must be given together");
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << f.rdbuf();
  return parse_config(text.str());
}

}  // namespace hilqr::app
