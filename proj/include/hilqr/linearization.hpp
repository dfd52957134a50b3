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

#include "hilqr/hybrid_system.hpp"
#include "hilqr/integrator.hpp"

namespace hilqr {

// Jacobians of the discrete flow map x_{k+1} = f_dt(x_k, u_k) inside one mode.
struct FlowJacobians {
  Matrix f_x;
  Matrix f_u;
  Vector x_end;
};

// Integrates the variational equations
//
//   Phi' = D_x F Phi,  Psi' = D_x F Psi + D_u F,  Phi(0) = I, Psi(0) = 0
//
// alongside the state, holding u constant. A zero-length step returns (I, 0).
inline FlowJacobians linearize_flow(const HybridSystem& sys, ModeId mode, double t,
                                    const Vector& x, const Vector& u, double dt,
                                    const IntegratorOptions& options = {}) {
  const Eigen::Index n = x.size();
  const Eigen::Index m = u.size();
  if (dt == 0.0) {
    return {Matrix::Identity(n, n), Matrix::Zero(n, m), x};
  }
  Vector y0 = Vector::Zero(n + n * n + n * m);
  y0.head(n) = x;
  Eigen::Map<Matrix>(y0.data() + n, n, n).setIdentity();

  auto rhs = [&](double s, const Vector& y) {
    const Vector xs = y.head(n);
    const Matrix a = sys.field_dx(mode, s, xs, u);
    const Matrix b = sys.field_du(mode, s, xs, u);
    Eigen::Map<const Matrix> phi(y.data() + n, n, n);
    Eigen::Map<const Matrix> psi(y.data() + n + n * n, n, m);
    Vector dy(y.size());
    dy.head(n) = sys.field(mode, s, xs, u);
    Eigen::Map<Matrix>(dy.data() + n, n, n) = a * phi;
    Eigen::Map<Matrix>(dy.data() + n + n * n, n, m) = a * psi + b;
    return dy;
  };
  const Vector y1 = integrate(rhs, t, y0, t + dt, options);
  return {Eigen::Map<const Matrix>(y1.data() + n, n, n),
          Eigen::Map<const Matrix>(y1.data() + n + n * n, n, m), y1.head(n)};
}

/// Jacobians (f_x, f_u) of one control step of length dt > 0 in `mode`.
inline FlowJacobians linearize_flow_step(const HybridSystem& sys, ModeId mode, double t,
                                         const Vector& x, const Vector& u, double dt,
                                         const IntegratorOptions& options = {}) {
  sys.check_mode(mode);
  sys.check_state(x);
  sys.check_input(u);
  if (!(dt > 0.0)) throw InvalidArgument("linearize_flow_step: dt must be positive");
  return linearize_flow(sys, mode, t, x, u, dt, options);
}

}  // namespace hilqr
