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

#include <algorithm>
#include <cmath>
#include <type_traits>

#include "hilqr/types.hpp"

namespace hilqr {

// Central-difference step for coordinate value v.
inline double fd_step(double v) { return 1e-6 * std::max(1.0, std::abs(v)); }

// Jacobian of a vector map by central differences, one column per coordinate.
template <class F>
Matrix fd_jacobian(F&& f, const Vector& x) {
  const Vector f0 = f(x);
  Matrix jac(f0.size(), x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const Vector fp = f(xp);
    xp[i] = x[i] - h;
    const Vector fm = f(xp);
    xp[i] = x[i];
    jac.col(i) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// Gradient of a scalar map by central differences.
template <class F>
Vector fd_gradient(F&& f, const Vector& x) {
  Vector grad(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

// Derivative of a scalar- or vector-valued function of one variable.
// Returns by value: an Eigen expression here would outlive its operands.
template <class F>
auto fd_derivative(F&& f, double t) -> std::decay_t<decltype(f(t))> {
  const double h = fd_step(t);
  return (f(t + h) - f(t - h)) / (2.0 * h);
}

}  // namespace hilqr
