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

#include <cstddef>
#include <vector>

#include "hilqr/types.hpp"

namespace hilqr {

// Second-order model of the action-value function at one knot.
struct ExpansionCoefficients {
  Vector Q_x;
  Vector Q_u;
  Matrix Q_xx;
  Matrix Q_ux;
  Matrix Q_uu;
};

// Output of a backward pass: the local policy du = u_ff + K dx per knot and
// the two sums that make up the expected cost change.
struct GainSchedule {
  std::vector<Vector> u_ff;
  std::vector<Matrix> K;
  double dJ_linear = 0.0;     // sum u_ff^T Q_u
  double dJ_quadratic = 0.0;  // sum u_ff^T Q_uu u_ff
  double regularization = 0.0;

  // Diagnostics kept from the recursion: Q-function expansions per knot and
  // the value function expansion per knot (N + 1 entries).
  std::vector<ExpansionCoefficients> expansions;
  std::vector<Vector> V_x;
  std::vector<Matrix> V_xx;

  std::size_t size() const { return u_ff.size(); }
};

/// Predicted cost change for a feedforward step scaled by alpha:
///   alpha * sum u_ff^T Q_u + alpha^2 / 2 * sum u_ff^T Q_uu u_ff.
/// Negative values predict a decrease.
inline double expected_reduction(const GainSchedule& gains, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("expected_reduction: alpha must lie in [0, 1]");
  }
  return alpha * gains.dJ_linear + 0.5 * alpha * alpha * gains.dJ_quadratic;
}

}  // namespace hilqr
