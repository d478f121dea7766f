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

#include "nclosure/baseline.hpp"

#include <span>

#include "nclosure/stencil.hpp"

namespace nclosure {

Field smagorinsky_closure(const Field& u, const Grid1D& grid, double cs,
                          double delta) {
  Field out = Field::Zero(u.rows(), u.cols());
  if (cs == 0.0) return out;
  const double d = delta > 0.0 ? delta : grid.h;
  const double nu = (cs * d) * (cs * d);
  const auto n = static_cast<std::size_t>(u.cols());
  Eigen::ArrayXd ux(u.cols());
  Eigen::ArrayXd flux(u.cols());
  for (Eigen::Index s = 0; s < u.rows(); ++s) {
    spatial_derivative(std::span<const double>(u.row(s).data(), n), 1, grid,
                       std::span<double>(ux.data(), n));
    flux = nu * ux.abs() * ux;
    spatial_derivative(std::span<const double>(flux.data(), n), 1, grid,
                       std::span<double>(out.row(s).data(), n));
  }
  return out;
}

}  // namespace nclosure
