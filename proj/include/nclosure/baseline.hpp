// Copyright 2026 The nclosure Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Eddy-viscosity baseline closure.

#ifndef NCLOSURE_BASELINE_HPP
#define NCLOSURE_BASELINE_HPP

#include "nclosure/core.hpp"

namespace nclosure {

/// Default Smagorinsky coefficient.
inline constexpr double kDefaultSmagorinskyCs = 0.17;

/// d/dx( (cs * delta)^2 * |u_x| * u_x ) per state, with delta = h when
/// `delta` is nonpositive.
Field smagorinsky_closure(const Field& u, const Grid1D& grid, double cs,
                          double delta = 0.0);

}  // namespace nclosure

#endif  // NCLOSURE_BASELINE_HPP
