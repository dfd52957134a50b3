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

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hilqr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Index into a system's mode set.
struct ModeId {
  std::size_t value = 0;

  friend constexpr bool operator==(ModeId, ModeId) = default;
  friend constexpr auto operator<=>(ModeId, ModeId) = default;
};

// A directed edge (source -> target) of the transition graph.
struct TransitionId {
  ModeId source;
  ModeId target;

  friend constexpr bool operator==(TransitionId, TransitionId) = default;
};

// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad ids, dimension mismatches, violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The guard is (nearly) tangent to the flow at the event; the saltation
// matrix is undefined there.
class TransversalityError : public Error {
 public:
  using Error::Error;
};

// Adaptive integration could not meet its tolerances.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

// Root finding on a guard failed, or a window has no sign change.
class EventLocationError : public Error {
 public:
  using Error::Error;
};

// A second hybrid event was triggered inside a single control step.
class ZenoError : public Error {
 public:
  using Error::Error;
};

// A mode mismatch occurred at a knot that no reference extension covers.
class ExtensionCoverageError : public Error {
 public:
  using Error::Error;
};

// The optimizer could not produce a usable result.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace hilqr
