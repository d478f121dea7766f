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

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nclosure/baseline.hpp"
#include "nclosure/stencil.hpp"

using namespace nclosure;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double max_error(int n, int k) {
  const Grid1D g = make_grid(0.0, kTwoPi, n, BoundaryKind::kPeriodic);
  Eigen::ArrayXd f(n), exact(n);
  for (int i = 0; i < n; ++i) {
    const double x = g.x(i);
    f(i) = std::sin(x) + 0.5 * std::cos(2.0 * x);
    // d^k/dx^k sin = sin(x + k pi/2); likewise for cos.
    exact(i) = std::sin(x + k * std::numbers::pi / 2) +
               0.5 * std::pow(2.0, k) * std::cos(2.0 * x + k * std::numbers::pi / 2);
  }
  return (spatial_derivative(f, k, g) - exact).abs().maxCoeff();
}

}  // namespace

TEST_CASE("periodic stencils converge at second order") {
  for (int k = 1; k <= 3; ++k) {
    CAPTURE(k);
    const double order = std::log2(max_error(64, k) / max_error(128, k));
    CHECK(order > 1.9);
    CHECK(order < 2.1);
  }
}

TEST_CASE("Dirichlet stencils are exact on low-degree polynomials") {
  const Grid1D g = make_grid(0.0, 1.0, 11, BoundaryKind::kDirichletHomogeneous);
  Eigen::ArrayXd f(11);
  for (int i = 0; i < 11; ++i) f(i) = std::pow(g.x(i), 2);
  const Eigen::ArrayXd d1 = spatial_derivative(f, 1, g);
  const Eigen::ArrayXd d2 = spatial_derivative(f, 2, g);
  for (int i = 0; i < 11; ++i) {
    CHECK(d1(i) == doctest::Approx(2.0 * g.x(i)).epsilon(1e-10));
    CHECK(d2(i) == doctest::Approx(2.0).epsilon(1e-9));
  }
  for (int i = 0; i < 11; ++i) f(i) = std::pow(g.x(i), 3);
  const Eigen::ArrayXd d3 = spatial_derivative(f, 3, g);
  for (int i = 0; i < 11; ++i) CHECK(d3(i) == doctest::Approx(6.0).epsilon(1e-7));
}

TEST_CASE("periodic adjoint stencil satisfies the transpose identity") {
  // <D_k f, v> = (-1)^k <f, D_k v> for the centred periodic stencils.
  const Grid1D g = make_grid(0.0, 1.0, 17, BoundaryKind::kPeriodic);
  Eigen::ArrayXd f(17), v(17);
  for (int i = 0; i < 17; ++i) {
    f(i) = std::sin(3.0 * i) + 0.1 * i;
    v(i) = std::cos(1.7 * i * i);
  }
  for (int k = 1; k <= 3; ++k) {
    const double lhs = (spatial_derivative(f, k, g) * v).sum();
    const double rhs = (k % 2 ? -1.0 : 1.0) * (f * adjoint_divergence(v, k, g)).sum();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("stencil argument checks") {
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  CHECK_THROWS(spatial_derivative(Eigen::ArrayXd::Zero(7), 1, g));
  CHECK_THROWS(spatial_derivative(Eigen::ArrayXd::Zero(8), 4, g));
}

TEST_CASE("Smagorinsky term") {
  const Grid1D g = make_grid(0.0, kTwoPi, 64, BoundaryKind::kPeriodic);
  Field u(1, 64);
  for (int i = 0; i < 64; ++i) u(0, i) = std::sin(g.x(i));
  SUBCASE("vanishes on constants and for C_s = 0") {
    CHECK(smagorinsky_closure(Field::Constant(1, 64, 3.0), g, 0.17)
              .abs().maxCoeff() == 0.0);
    CHECK(smagorinsky_closure(u, g, 0.0).abs().maxCoeff() == 0.0);
  }
  SUBCASE("dissipates discrete energy over one RK4 step") {
    const double dt = 0.01;
    auto f = [&](const Field& v) { return smagorinsky_closure(v, g, 0.17); };
    const Field k1 = f(u);
    const Field k2 = f(u + 0.5 * dt * k1);
    const Field k3 = f(u + 0.5 * dt * k2);
    const Field k4 = f(u + dt * k3);
    const Field u1 = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    CHECK(u1.square().sum() < u.square().sum());
  }
}
