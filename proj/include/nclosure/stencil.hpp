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

// Second-order finite-difference spatial derivatives on uniform 1D grids.

#ifndef NCLOSURE_STENCIL_HPP
#define NCLOSURE_STENCIL_HPP

#include <span>

#include "nclosure/core.hpp"

namespace nclosure {

/// Highest spatial derivative order any stencil or library term uses.
inline constexpr int kMaxDerivOrder = 3;

/// Writes the k-th derivative (k in 1..3) of node values `f` into `out`.
///
/// Interior nodes use central stencils:
///   k=1: (f[i+1] - f[i-1]) / 2h
///   k=2: (f[i+1] - 2 f[i] + f[i-1]) / h^2
///   k=3: (f[i+2] - 2 f[i+1] + 2 f[i-1] - f[i-2]) / 2h^3
/// Periodic grids wrap indices. Dirichlet grids switch to second-order
/// one-sided stencils at the end nodes (k=1,2) or the two nodes nearest each
/// end (k=3).
void spatial_derivative(std::span<const double> f, int k, const Grid1D& grid,
                        std::span<double> out);

Eigen::ArrayXd spatial_derivative(const Eigen::ArrayXd& f, int k,
                                  const Grid1D& grid);

/// d^k/dx^k of a product field v formed nodewise by the caller, as needed by
/// the divergence terms of the adjoint equations. Same numerics as
/// spatial_derivative.
void adjoint_divergence(std::span<const double> v, int k, const Grid1D& grid,
                        std::span<double> out);

Eigen::ArrayXd adjoint_divergence(const Eigen::ArrayXd& v, int k,
                                  const Grid1D& grid);

}  // namespace nclosure

#endif  // NCLOSURE_STENCIL_HPP
