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
#include "nclosure/error.hpp"
#include "nclosure/forward.hpp"

using namespace nclosure;

namespace {

NetTerm constant_term(double c) {
  NetTerm t{FeatureLibrary::parse({"one"}), presets::interpretable_linear(1)};
  t.net.params()[0] = c;
  return t;
}

NetTerm identity_term() {
  NetTerm t{FeatureLibrary::parse({"u"}), presets::interpretable_linear(1)};
  t.net.params()[0] = 1.0;
  return t;
}

Grid1D small_grid() { return make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic); }

}  // namespace

TEST_CASE("history quadrature panel count") {
  CHECK(history_quadrature_panels(0.5, 0.1) == 8);
  CHECK(history_quadrature_panels(1.0, 0.01) == 100);
  CHECK(history_quadrature_panels(0.075, 0.01) == 8);
}

TEST_CASE("split-form initial memory integrates the history") {
  const Grid1D g = small_grid();
  ClosureModel m;
  m.memory = constant_term(2.0);
  m.tau = 0.5;
  const Field y0 =
      init_y0(m, HistoryFn::constant(Field::Ones(1, 8)), g, 0.0, 0.1);
  CHECK((y0 - 1.0).abs().maxCoeff() < 1e-12);
  // Linear history h(t) = 1 + t under D(u) = u: exact trapezoid value.
  m.memory = identity_term();
  Field a = Field::Constant(1, 8, 0.5), b = Field::Ones(1, 8);
  const Field y1 = init_y0(
      m, HistoryFn::data_interpolant({-0.5, 0.0}, {a, b}), g, 0.0, 0.1);
  CHECK(std::abs(y1(0, 3) - 0.375) < 1e-14);
}

TEST_CASE("constant memory drives linear growth") {
  const Grid1D g = small_grid();
  ClosureModel m;
  m.memory = constant_term(2.0);
  m.tau = 0.5;
  const ForwardSolution s = integrate_forward(
      m, g, HistoryFn::constant(Field::Ones(1, 8)), 0.0, 1.0, 0.01);
  CHECK(s.n_steps == 100);
  CHECK((s.u.value(100) - 2.0).abs().maxCoeff() < 1e-10);
  CHECK(s.y.has_value());
}

TEST_CASE("method of steps matches the analytic delay solution") {
  // u' = integral of u over [t - tau, t], u = 1 on the history window.
  // On [0, tau]: u(t) = 1 + tau sinh(t).
  const Grid1D g = small_grid();
  ClosureModel m;
  m.memory = identity_term();
  m.tau = 0.5;
  const ForwardSolution s = integrate_forward(
      m, g, HistoryFn::constant(Field::Ones(1, 8)), 0.0, 0.5, 0.01);
  CHECK(std::abs(s.u.value(s.n_steps)(0, 0) - (1.0 + 0.5 * std::sinh(0.5))) < 1e-9);
  // Mid-step dense output follows the same curve.
  CHECK(std::abs(s.u.query(0.255)(0, 2) - (1.0 + 0.5 * std::sinh(0.255))) < 1e-8);
}

TEST_CASE("RK4 converges at fourth order") {
  // u' = -u^2 has u(t) = u0 / (1 + u0 t).
  const Grid1D g = small_grid();
  ClosureModel m;
  m.base = make_base_term(1, {{0, "u2", -1.0}});
  Field u0(1, 8);
  for (int i = 0; i < 8; ++i) u0(0, i) = 1.0 + 0.25 * i;
  auto err = [&](double dt) {
    const ForwardSolution s =
        integrate_forward(m, g, HistoryFn::constant(u0), 0.0, 2.0, dt);
    const Field exact = u0 / (1.0 + 2.0 * u0);
    return (s.u.value(s.n_steps) - exact).abs().maxCoeff();
  };
  const double order = std::log2(err(0.1) / err(0.05));
  CHECK(order > 3.5);
  CHECK(order < 4.5);
}

TEST_CASE("forward input checks") {
  const Grid1D g = small_grid();
  ClosureModel m;
  m.base = make_base_term(1, {{0, "uxx", 0.1}});
  const HistoryFn h = HistoryFn::constant(Field::Ones(1, 8));
  CHECK_THROWS_AS(integrate_forward(m, g, h, 0.0, 1.0, 0.3), InvalidArgument);
  m.memory = identity_term();
  m.tau = 0.0;
  CHECK_THROWS_AS(integrate_forward(m, g, h, 0.0, 1.0, 0.1), InvalidArgument);
  ClosureModel bad;
  bad.n_states = 2;
  bad.base = make_base_term(1, {{0, "u", 1.0}});
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
}

TEST_CASE("blow-up surfaces as BlowUp") {
  const Grid1D g = small_grid();
  ClosureModel m;
  m.base = make_base_term(1, {{0, "u2", 1.0}});
  CHECK_THROWS_AS(integrate_forward(m, g, HistoryFn::constant(Field::Ones(1, 8)),
                                    0.0, 5.0, 0.01),
                  BlowUp);
}

TEST_CASE("Dirichlet end nodes stay at zero") {
  const Grid1D g = make_grid(0.0, 1.0, 11, BoundaryKind::kDirichletHomogeneous);
  ClosureModel m;
  m.base = make_base_term(1, {{0, "uxx", 0.1}, {0, "one", 1.0}});
  Field u0(1, 11);
  for (int i = 0; i < 11; ++i) u0(0, i) = std::sin(std::numbers::pi * g.x(i));
  const ForwardSolution s =
      integrate_forward(m, g, HistoryFn::constant(u0), 0.0, 0.5, 0.001);
  const Field& u = s.u.value(s.n_steps);
  CHECK(u(0, 0) == 0.0);
  CHECK(u(0, 10) == 0.0);
  CHECK(u(0, 5) > 0.0);
}
