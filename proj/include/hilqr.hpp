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

#include "hilqr/types.hpp"
#include "hilqr/finite_difference.hpp"
#include "hilqr/hybrid_system.hpp"
#include "hilqr/saltation.hpp"
#include "hilqr/integrator.hpp"
#include "hilqr/linearization.hpp"
#include "hilqr/simulator.hpp"
#include "hilqr/extensions.hpp"
#include "hilqr/gains.hpp"
#include "hilqr/closed_loop.hpp"
#include "hilqr/cost.hpp"
#include "hilqr/ilqr.hpp"
#include "hilqr/mpc.hpp"
#include "hilqr/systems/bouncing_ball.hpp"
#include "hilqr/systems/double_integrator.hpp"
#include "hilqr/systems/single_bounce_reference.hpp"
