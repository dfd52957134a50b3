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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hilqr/finite_difference.hpp"
#include "hilqr/types.hpp"

namespace hilqr {

using VectorField = std::function<Vector(double t, const Vector& x, const Vector& u)>;
using FieldJacobian = std::function<Matrix(double t, const Vector& x, const Vector& u)>;
using GuardFunction = std::function<double(double t, const Vector& x)>;
using GuardTimeDerivative = std::function<double(double t, const Vector& x)>;
using GuardGradient = std::function<Vector(double t, const Vector& x)>;
using ResetMap = std::function<Vector(double t, const Vector& x)>;
using ResetJacobian = std::function<Matrix(double t, const Vector& x)>;
using ResetTimeDerivative = std::function<Vector(double t, const Vector& x)>;
using ModeClassifier = std::function<ModeId(double t, const Vector& x)>;

// Continuous dynamics of one discrete mode. Empty derivative callbacks fall
// back to central finite differences.
struct Mode {
  std::string name;
  VectorField field;
  FieldJacobian field_dx;
  FieldJacobian field_du;
};

// Guard g(t, x) and reset R(t, x) attached to one edge of the transition
// graph. The guard set is g <= 0; events fire when g crosses from positive.
struct Transition {
  TransitionId id;
  GuardFunction guard;
  ResetMap reset;
  GuardTimeDerivative guard_dt;
  GuardGradient guard_dx;
  ResetTimeDerivative reset_dt;
  ResetJacobian reset_dx;
};

// A hybrid dynamical system with a fixed state dimension across modes.
// Immutable after construction, so it can be shared read-only by concurrent
// rollouts.
class HybridSystem {
 public:
  HybridSystem(std::size_t state_dim, std::size_t input_dim,
               std::vector<Mode> modes, std::vector<Transition> transitions,
               ModeClassifier classifier = {})
      : state_dim_(state_dim),
        input_dim_(input_dim),
        modes_(std::move(modes)),
        transitions_(std::move(transitions)),
        classifier_(std::move(classifier)) {
    if (state_dim_ == 0) throw InvalidArgument("state dimension must be positive");
    if (modes_.empty()) throw InvalidArgument("a hybrid system needs at least one mode");
    for (const Mode& m : modes_) {
      if (!m.field) throw InvalidArgument("mode '" + m.name + "' has no vector field");
    }
    outgoing_.resize(modes_.size());
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
      const Transition& tr = transitions_[i];
      if (tr.id.source.value >= modes_.size() || tr.id.target.value >= modes_.size()) {
        throw InvalidArgument("transition " + std::to_string(i) + " references an unknown mode");
      }
      if (!tr.guard || !tr.reset) {
        throw InvalidArgument("transition " + std::to_string(i) + " needs a guard and a reset");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (transitions_[j].id == tr.id) {
          throw InvalidArgument("duplicate transition " + std::to_string(tr.id.source.value) +
                                "->" + std::to_string(tr.id.target.value));
        }
      }
      outgoing_[tr.id.source.value].push_back(i);
    }
  }

  std::size_t state_dim() const { return state_dim_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t mode_count() const { return modes_.size(); }
  std::size_t transition_count() const { return transitions_.size(); }

  const Mode& mode(ModeId id) const {
    check_mode(id);
    return modes_[id.value];
  }

  const Transition& transition(std::size_t index) const {
    if (index >= transitions_.size()) {
      throw InvalidArgument("invalid transition index " + std::to_string(index));
    }
    return transitions_[index];
  }

  std::size_t transition_index(TransitionId id) const {
    for (std::size_t i = 0; i < transitions_.size(); ++i) {
      if (transitions_[i].id == id) return i;
    }
    throw InvalidArgument("no transition " + std::to_string(id.source.value) + "->" +
                          std::to_string(id.target.value));
  }

  const Transition& transition(TransitionId id) const { return transitions_[transition_index(id)]; }

  // Transition indices leaving `id`, in registration order.
  std::span<const std::size_t> outgoing(ModeId id) const {
    check_mode(id);
    return outgoing_[id.value];
  }

  // Mode assignment for an initial state, when the system defines one.
  std::optional<ModeId> classify(double t, const Vector& x) const {
    if (!classifier_) return std::nullopt;
    return classifier_(t, x);
  }

  void check_mode(ModeId id) const {
    if (id.value >= modes_.size()) {
      throw InvalidArgument("invalid mode id " + std::to_string(id.value));
    }
  }

  void check_state(const Vector& x) const {
    if (static_cast<std::size_t>(x.size()) != state_dim_) {
      throw InvalidArgument("state has dimension " + std::to_string(x.size()) + ", expected " +
                            std::to_string(state_dim_));
    }
  }

  void check_input(const Vector& u) const {
    if (static_cast<std::size_t>(u.size()) != input_dim_) {
      throw InvalidArgument("input has dimension " + std::to_string(u.size()) + ", expected " +
                            std::to_string(input_dim_));
    }
  }

  // Unchecked evaluation; callers validate ids and dimensions once.
  Vector field(ModeId id, double t, const Vector& x, const Vector& u) const {
    return modes_[id.value].field(t, x, u);
  }

  Matrix field_dx(ModeId id, double t, const Vector& x, const Vector& u) const {
    const Mode& m = modes_[id.value];
    if (m.field_dx) return m.field_dx(t, x, u);
    return fd_jacobian([&](const Vector& y) { return m.field(t, y, u); }, x);
  }

  Matrix field_du(ModeId id, double t, const Vector& x, const Vector& u) const {
    const Mode& m = modes_[id.value];
    if (m.field_du) return m.field_du(t, x, u);
    if (u.size() == 0) return Matrix(x.size(), 0);
    return fd_jacobian([&](const Vector& v) { return m.field(t, x, v); }, u);
  }

  double guard(std::size_t tr, double t, const Vector& x) const {
    return transitions_[tr].guard(t, x);
  }

  double guard_dt(std::size_t tr, double t, const Vector& x) const {
    const Transition& d = transitions_[tr];
    if (d.guard_dt) return d.guard_dt(t, x);
    return fd_derivative([&](double s) { return d.guard(s, x); }, t);
  }

  Vector guard_dx(std::size_t tr, double t, const Vector& x) const {
    const Transition& d = transitions_[tr];
    if (d.guard_dx) return d.guard_dx(t, x);
    return fd_gradient([&](const Vector& y) { return d.guard(t, y); }, x);
  }

  Vector reset(std::size_t tr, double t, const Vector& x) const {
    return transitions_[tr].reset(t, x);
  }

  Vector reset_dt(std::size_t tr, double t, const Vector& x) const {
    const Transition& d = transitions_[tr];
    if (d.reset_dt) return d.reset_dt(t, x);
    return fd_derivative([&](double s) -> Vector { return d.reset(s, x); }, t);
  }

  Matrix reset_dx(std::size_t tr, double t, const Vector& x) const {
    const Transition& d = transitions_[tr];
    if (d.reset_dx) return d.reset_dx(t, x);
    return fd_jacobian([&](const Vector& y) { return d.reset(t, y); }, x);
  }

 private:
  std::size_t state_dim_;
  std::size_t input_dim_;
  std::vector<Mode> modes_;
  std::vector<Transition> transitions_;
  std::vector<std::vector<std::size_t>> outgoing_;
  ModeClassifier classifier_;
};

/// F_mode(t, x, u), with id and dimension checks.
inline Vector eval_vector_field(const HybridSystem& sys, ModeId mode, double t, const Vector& x,
                                const Vector& u) {
  sys.check_mode(mode);
  sys.check_state(x);
  sys.check_input(u);
  return sys.field(mode, t, x, u);
}

/// g_tr(t, x).
inline double eval_guard(const HybridSystem& sys, TransitionId tr, double t, const Vector& x) {
  const std::size_t index = sys.transition_index(tr);
  sys.check_state(x);
  return sys.guard(index, t, x);
}

/// x+ = R_tr(t, x-).
inline Vector apply_reset(const HybridSystem& sys, TransitionId tr, double t,
                          const Vector& x_minus) {
  const std::size_t index = sys.transition_index(tr);
  sys.check_state(x_minus);
  return sys.reset(index, t, x_minus);
}

}  // namespace hilqr
