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

#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "config.hpp"
#include "hilqr/io.hpp"
#include "hilqr/mpc.hpp"
#include "hilqr/systems/bouncing_ball.hpp"
#include "hilqr/systems/single_bounce_reference.hpp"
#include "verification.hpp"

namespace hilqr::app {
namespace {

using io::json;

struct Loaded {
  ExperimentConfig config;
  std::filesystem::path out;
};

Loaded load(const CommandOptions& opts) {
  Loaded l{opts.config.empty() ? default_config() : load_config(opts.config), {}};
  if (opts.seed) l.config.seed = *opts.seed;
  if (!opts.perturb.empty()) l.config.perturbation = parse_perturbation(opts.perturb);
  l.out = opts.out.empty() ? l.config.output : opts.out;
  std::error_code ec;
  std::filesystem::create_directories(l.out, ec);
  if (ec) throw ConfigError("cannot create output directory '" + l.out.string() + "': " + ec.message());
  return l;
}

std::string csv(const HybridTrajectory& traj) {
  std::ostringstream s;
  io::write_trajectory_csv(s, traj);
  return s.str();
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

systems::SingleBounceReference generate_reference(const ExperimentConfig& c) {
  SolveOptions o;
  o.max_iterations = c.reference.max_iterations;
  o.convergence_threshold = c.reference.threshold;
  o.extension_horizon = c.reference.extension_horizon;
  return systems::make_single_bounce_reference(c.system, c.reference.start, c.reference.goal,
                                               c.reference.duration, c.reference.dt,
                                               c.reference.weights, o, c.reference.goal_tolerance);
}

std::shared_ptr<const TrackedReference> load_reference(const ExperimentConfig& c, const HybridSystem& ball,
                                                       std::ostream& log) {
  if (c.reference.trajectory.empty()) {
    log << "generating single-bounce reference\n";
    return generate_reference(c).reference;
  }
  auto ref = std::make_shared<TrackedReference>();
  std::istringstream in(read_file(c.reference.trajectory));
  ref->trajectory = io::read_trajectory_csv(in);
  json events;
  try {
    events = json::parse(read_file(c.reference.events));
  } catch (const json::parse_error& e) {
    throw ConfigError("reference events are not valid JSON: " + std::string(e.what()));
  }
  io::events_from_json(events, ball, ref->trajectory);
  if (ref->trajectory.states.front().size() != 2) throw ConfigError("reference must have two state columns");
  const std::size_t horizon =
      c.reference.extension_horizon.value_or(default_extension_horizon(ref->trajectory.horizon()));
  ref->extensions = build_extensions(ball, ref->trajectory, horizon);
  log << "loaded reference with " << ref->trajectory.states.size() << " knots\n";
  return ref;
}

// Runs one subcommand body and maps library failures onto exit codes.
template <class F>
int guarded(std::ostream& log, int hard_failure, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidArgument& e) {
    log << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const Error& e) {
    log << "error: " << e.what() << '\n';
    return hard_failure;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return hard_failure;
  }
}

}  // namespace

int cmd_simulate(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, kExitSimulation, [&] {
    const Loaded l = load(opts);
    const ExperimentConfig& c = l.config;
    const HybridSystem ball = systems::bouncing_ball(c.system);
    const std::size_t n = systems::knot_count(c.simulate.duration, c.simulate.dt);
    std::vector<Vector> inputs(n, Vector::Constant(1, c.simulate.input));
    if (!c.simulate.inputs.empty()) {
      if (c.simulate.inputs.size() != n) {
        throw ConfigError("config field 'simulate.inputs': expected " + std::to_string(n) + " entries");
      }
      for (std::size_t k = 0; k < n; ++k) inputs[k][0] = c.simulate.inputs[k];
    }
    const ModeId mode0 = c.simulate.mode0 ? ModeId{*c.simulate.mode0} : *ball.classify(0.0, c.simulate.x0);
    const HybridTrajectory traj = rollout(ball, c.simulate.x0, mode0, inputs, c.simulate.dt);
    io::write_text((l.out / "trajectory.csv").string(), csv(traj));
    io::write_json((l.out / "events.json").string(), io::events_to_json(traj));
    log << "simulated " << n << " steps, " << traj.events.size() << " events -> " << l.out.string() << '\n';
    return int{kExitOk};
  });
}

int cmd_solve(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, kExitSimulation, [&] {
    const Loaded l = load(opts);
    const systems::SingleBounceReference ref = generate_reference(l.config);
    const HybridTrajectory& traj = ref.reference->trajectory;
    io::write_text((l.out / "reference.csv").string(), csv(traj));
    io::write_json((l.out / "reference_events.json").string(), io::events_to_json(traj));
    io::write_json((l.out / "extensions.json").string(), io::extensions_to_json(ref.reference->extensions));
    io::write_json((l.out / "gains.json").string(), io::gains_to_json(ref.gains));
    io::write_json((l.out / "report.json").string(), io::report_to_json(ref.report));
    const Vector& xf = traj.states.back();
    log << "converged in " << ref.report.iterations << " iterations, cost " << ref.report.final_cost
        << ", final state [" << xf[0] << ", " << xf[1] << "]\n";
    return int{kExitOk};
  });
}

int cmd_mpc(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, kExitSimulation, [&] {
    const Loaded l = load(opts);
    const ExperimentConfig& c = l.config;
    auto ball = std::make_shared<const HybridSystem>(systems::bouncing_ball(c.system));
    const auto reference = load_reference(c, *ball, log);
    Vector disturbance = Vector::Zero(2);
    disturbance[static_cast<Eigen::Index>(c.perturbation.component)] = c.perturbation.magnitude;

    std::size_t impact_knot = 0;
    for (const TrajectoryEvent& ev : reference->trajectory.events) {
      if (ev.record.transition == systems::kImpact) {
        impact_knot = ev.knot;
        break;
      }
    }
    auto run = [&](bool cost_update, const std::string& suffix) {
      MpcConfig cfg = c.mpc;
      cfg.cost_update = cost_update;
      const TrackingProblem problem = make_tracking_problem(ball, reference, c.weights, cfg);
      const MpcLog result = run_mpc(problem, *ball, cfg, disturbance);
      std::ostringstream s;
      io::write_mpc_log_csv(s, result);
      io::write_text((l.out / ("mpc_log" + suffix + ".csv")).string(), s.str());
      std::ostringstream t;
      io::write_mpc_timing_csv(t, result);
      io::write_text((l.out / ("mpc_timing" + suffix + ".csv")).string(), t.str());
      json summary = io::summary_to_json(result.summary);
      summary["cost_update"] = cost_update;
      const std::size_t radius = cfg.horizon;
      summary["peak_input_near_impact"] = peak_input_between(
          result, impact_knot > radius ? impact_knot - radius : 0, impact_knot + radius);
      log << (cost_update ? "cost update on: " : "cost update off: ") << result.summary.n_nonconverged
          << " of " << result.summary.n_steps << " solves did not converge\n";
      return summary;
    };
    json summary;
    summary["perturbation"] = {{"component", c.perturbation.component}, {"magnitude", c.perturbation.magnitude}};
    summary["reference_impact_knot"] = impact_knot;
    if (opts.ablation) {
      summary["update"] = run(true, "_update");
      summary["no_update"] = run(false, "_no_update");
    } else {
      summary["run"] = run(c.mpc.cost_update, "");
    }
    io::write_json((l.out / "summary.json").string(), summary);
    return int{kExitOk};
  });
}

int cmd_check(const CommandOptions& opts, std::ostream& log) {
  return guarded(log, kExitVerification, [&] {
    const Loaded l = load(opts);
    const std::vector<CheckResult> results = run_verification(l.config, l.config.seed);
    bool ok = true;
    json report = json::array();
    for (const CheckResult& r : results) {
      log << (r.passed ? "PASS " : "FAIL ") << r.name << "  measured=" << io::format_double(r.measured)
          << "  tol=" << r.tolerance << "  (" << r.detail << ")\n";
      ok = ok && r.passed;
      report.push_back({{"name", r.name},
                        {"measured", r.measured},
                        {"tolerance", r.tolerance},
                        {"passed", r.passed},
                        {"detail", r.detail}});
    }
    io::write_json((l.out / "check.json").string(), report);
    return ok ? int{kExitOk} : int{kExitVerification};
  });
}

}  // namespace hilqr::app
