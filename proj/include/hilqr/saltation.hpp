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
#include <sstream>

#include "hilqr/hybrid_system.hpp"

namespace hilqr {

// Below this magnitude the guard is treated as tangent to the flow.
inline constexpr double kTransversalityTolerance = 1e-8;

struct SaltationResult {
  Matrix matrix;
  // D_t g + D_x g . F_I at the event.
  double denominator = 0.0;
};

// Saltation matrix for transition `tr_index` at pre-event state x_minus:
//
//   Xi = D_x R + (F_J - D_x R F_I - D_t R) D_x g^T / (D_t g + D_x g . F_I)
//
// with F_I evaluated at (t, x-, u) and F_J at (t, R(t, x-), u).
inline SaltationResult saltation_matrix(const HybridSystem& sys, std::size_t tr_index, double t,
                                        const Vector& x_minus, const Vector& u) {
  const Transition& tr = sys.transition(tr_index);
  const Vector f_pre = sys.field(tr.id.source, t, x_minus, u);
  const Vector x_plus = sys.reset(tr_index, t, x_minus);
  const Vector f_post = sys.field(tr.id.target, t, x_plus, u);
  const Matrix dr_dx = sys.reset_dx(tr_index, t, x_minus);
  const Vector dr_dt = sys.reset_dt(tr_index, t, x_minus);
  const Vector dg_dx = sys.guard_dx(tr_index, t, x_minus);
  const double dg_dt = sys.guard_dt(tr_index, t, x_minus);

  const double denominator = dg_dt + dg_dx.dot(f_pre);
  if (!(std::abs(denominator) >= kTransversalityTolerance)) {
    std::ostringstream msg;
    msg << "grazing event on transition " << tr.id.source.value << "->" << tr.id.target.value
        << " at t=" << t << ": |D_t g + D_x g . F| = " << std::abs(denominator) << " < "
        << kTransversalityTolerance;
    throw TransversalityError(msg.str());
  }
  const Vector jump = f_post - dr_dx * f_pre - dr_dt;
  return {dr_dx + jump * dg_dx.transpose() / denominator, denominator};
}

inline SaltationResult saltation_matrix(const HybridSystem& sys, TransitionId tr, double t,
                                        const Vector& x_minus, const Vector& u) {
  const std::size_t index = sys.transition_index(tr);
  sys.check_state(x_minus);
  sys.check_input(u);
  return saltation_matrix(sys, index, t, x_minus, u);
}

}  // namespace hilqr
