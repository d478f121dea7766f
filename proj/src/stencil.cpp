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

#include "nclosure/stencil.hpp"

#include <string>

#include "nclosure/error.hpp"

namespace nclosure {
namespace {

void check_args(std::size_t n_in, int k, const Grid1D& grid,
                std::size_t n_out) {
  if (k < 1 || k > kMaxDerivOrder) {
    throw InvalidArgument("unsupported derivative order " + std::to_string(k));
  }
  if (n_in != static_cast<std::size_t>(grid.n_nodes) || n_out != n_in) {
    throw InvalidArgument("stencil input length does not match grid");
  }
}

void periodic(std::span<const double> f, int k, double h,
              std::span<double> out) {
  const int n = static_cast<int>(f.size());
  auto at = [&](int i) { return f[static_cast<std::size_t>((i + n) % n)]; };
  switch (k) {
    case 1: {
      const double c = 1.0 / (2.0 * h);
      for (int i = 0; i < n; ++i) out[i] = c * (at(i + 1) - at(i - 1));
      break;
    }
    case 2: {
      const double c = 1.0 / (h * h);
      for (int i = 0; i < n; ++i) {
        out[i] = c * (at(i + 1) - 2.0 * at(i) + at(i - 1));
      }
      break;
    }
    default: {
      const double c = 1.0 / (2.0 * h * h * h);
      for (int i = 0; i < n; ++i) {
        out[i] = c * (at(i + 2) - 2.0 * at(i + 1) + 2.0 * at(i - 1) -
                      at(i - 2));
      }
      break;
    }
  }
}

void dirichlet(std::span<const double> f, int k, double h,
               std::span<double> out) {
  const std::size_t n = f.size();
  const std::size_t m = n - 1;
  switch (k) {
    case 1: {
      const double c = 1.0 / (2.0 * h);
      for (std::size_t i = 1; i < m; ++i) out[i] = c * (f[i + 1] - f[i - 1]);
      out[0] = c * (-3.0 * f[0] + 4.0 * f[1] - f[2]);
      out[m] = c * (3.0 * f[m] - 4.0 * f[m - 1] + f[m - 2]);
      break;
    }
    case 2: {
      const double c = 1.0 / (h * h);
      for (std::size_t i = 1; i < m; ++i) {
        out[i] = c * (f[i + 1] - 2.0 * f[i] + f[i - 1]);
      }
      out[0] = c * (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]);
      out[m] = c * (2.0 * f[m] - 5.0 * f[m - 1] + 4.0 * f[m - 2] - f[m - 3]);
      break;
    }
    default: {
      const double c = 1.0 / (2.0 * h * h * h);
      for (std::size_t i = 2; i + 2 < n; ++i) {
        out[i] = c * (f[i + 2] - 2.0 * f[i + 1] + 2.0 * f[i - 1] - f[i - 2]);
      }
      out[0] = c * (-5.0 * f[0] + 18.0 * f[1] - 24.0 * f[2] + 14.0 * f[3] -
                    3.0 * f[4]);
      out[1] = c * (-3.0 * f[0] + 10.0 * f[1] - 12.0 * f[2] + 6.0 * f[3] -
                    f[4]);
      // Mirror images: odd order flips sign.
      out[m] = -c * (-5.0 * f[m] + 18.0 * f[m - 1] - 24.0 * f[m - 2] +
                     14.0 * f[m - 3] - 3.0 * f[m - 4]);
      out[m - 1] = -c * (-3.0 * f[m] + 10.0 * f[m - 1] - 12.0 * f[m - 2] +
                         6.0 * f[m - 3] - f[m - 4]);
      break;
    }
  }
}

}  // namespace

void spatial_derivative(std::span<const double> f, int k, const Grid1D& grid,
                        std::span<double> out) {
  check_args(f.size(), k, grid, out.size());
  if (grid.periodic()) {
    periodic(f, k, grid.h, out);
  } else {
    dirichlet(f, k, grid.h, out);
  }
}

Eigen::ArrayXd spatial_derivative(const Eigen::ArrayXd& f, int k,
                                  const Grid1D& grid) {
  Eigen::ArrayXd out(f.size());
  spatial_derivative(std::span<const double>(f.data(), f.size()), k, grid,
                     std::span<double>(out.data(), out.size()));
  return out;
}

void adjoint_divergence(std::span<const double> v, int k, const Grid1D& grid,
                        std::span<double> out) {
  spatial_derivative(v, k, grid, out);
}

Eigen::ArrayXd adjoint_divergence(const Eigen::ArrayXd& v, int k,
                                  const Grid1D& grid) {
  return spatial_derivative(v, k, grid);
}

}  // namespace nclosure
