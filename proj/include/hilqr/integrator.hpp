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

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <cstddef>
#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "hilqr/types.hpp"

namespace hilqr {

struct IntegratorOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  std::size_t max_steps = 1'000'000;
};

// Adaptive Dormand-Prince 4(5) with dense output, stepping forward in time.
// Steps are clipped so that the last one lands exactly on the requested end
// time, which keeps the endpoint on the fifth-order solution rather than the
// interpolant.
//
// Rhs is callable as Vector(double t, const Vector& y).
template <class Rhs>
class DenseIntegrator {
 public:
  DenseIntegrator(Rhs rhs, IntegratorOptions options = {})
      : rhs_(std::move(rhs)),
        options_(options),
        stepper_(boost::numeric::odeint::make_dense_output(
            options.abs_tol, options.rel_tol, Stepper())) {}

  void initialize(double t0, const Vector& y0, double h0) {
    buffer_.assign(y0.data(), y0.data() + y0.size());
    stepper_.initialize(buffer_, t0, h0);
    steps_ = 0;
  }

  double time() const { return stepper_.current_time(); }

  Vector state() const { return to_vector(stepper_.current_state()); }

  // Takes one accepted step that does not pass t_end and returns its time
  // interval. The dense interpolant covers that interval afterwards.
  std::pair<double, double> step(double t_end) {
    if (++steps_ > options_.max_steps) {
      throw IntegrationError("integrator exceeded " + std::to_string(options_.max_steps) +
                             " steps");
    }
    const double t = stepper_.current_time();
    const double remaining = t_end - t;
    if (stepper_.current_time_step() > remaining) {
      buffer_ = stepper_.current_state();
      stepper_.initialize(buffer_, t, remaining);
    }
    std::pair<double, double> interval;
    try {
      interval = stepper_.do_step(
          [this](const State& y, State& dy, double s) {
            const Vector out = rhs_(s, to_vector(y));
            dy.assign(out.data(), out.data() + out.size());
          });
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw IntegrationError(std::string("integration failed: ") + e.what());
    }
    for (double v : stepper_.current_state()) {
      if (!std::isfinite(v)) throw IntegrationError("integration produced a non-finite state");
    }
    // Snap round-off at the requested endpoint.
    if (std::abs(interval.second - t_end) <= 1e-14 * std::max(1.0, std::abs(t_end))) {
      interval.second = t_end;
      at_end_ = true;
    } else {
      at_end_ = false;
    }
    return interval;
  }

  bool reached(double t_end) const {
    return at_end_ || stepper_.current_time() >= t_end;
  }

  // Dense output inside the most recent step.
  Vector state_at(double t) const {
    State out(buffer_.size());
    stepper_.calc_state(t, out);
    return to_vector(out);
  }

 private:
  using State = std::vector<double>;
  using Stepper = boost::numeric::odeint::runge_kutta_dopri5<State>;
  using DenseStepper =
      typename boost::numeric::odeint::result_of::make_dense_output<Stepper>::type;

  static Vector to_vector(const State& s) {
    return Eigen::Map<const Vector>(s.data(), static_cast<Eigen::Index>(s.size()));
  }

  Rhs rhs_;
  IntegratorOptions options_;
  mutable DenseStepper stepper_;
  State buffer_;
  std::size_t steps_ = 0;
  bool at_end_ = false;
};

// Flows y' = rhs(t, y) from t0 to t1 >= t0 and returns y(t1).
template <class Rhs>
Vector integrate(Rhs&& rhs, double t0, const Vector& y0, double t1,
                 IntegratorOptions options = {}) {
  if (t1 < t0) throw InvalidArgument("integrate: end time precedes start time");
  if (t1 == t0) return y0;
  DenseIntegrator<std::decay_t<Rhs>> flow(std::forward<Rhs>(rhs), options);
  flow.initialize(t0, y0, t1 - t0);
  while (!flow.reached(t1)) flow.step(t1);
  return flow.state();
}

}  // namespace hilqr
