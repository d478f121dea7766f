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
#include <random>

#include "doctest.h"
#include "nclosure/adjoint.hpp"
#include "nclosure/error.hpp"

using namespace nclosure;

namespace {

NetTerm linear_term(std::vector<std::string> names, std::vector<double> w) {
  NetTerm t{FeatureLibrary::parse(names),
            presets::interpretable_linear(static_cast<int>(names.size()))};
  std::copy(w.begin(), w.end(), t.net.params().begin());
  return t;
}

Field bump(int n, double shift) {
  Field u(1, n);
  for (int i = 0; i < n; ++i) u(0, i) = shift + std::cos(0.7 * i);
  return u;
}

}  // namespace

TEST_CASE("loss and its jump") {
  DataSet d = DataSet::full_field({1.0}, {Field::Zero(1, 4)}, LossKind::kMse);
  Field u(1, 4);
  u << 1.0, -2.0, 0.0, 1.0;
  CHECK(loss_jump(u, d, 0)(0, 1) == doctest::Approx(-1.0));  // 2 r / N
  d.loss = LossKind::kMae;
  CHECK(loss_jump(u, d, 0)(0, 1) == doctest::Approx(-0.25));
  CHECK(loss_jump(u, d, 0)(0, 2) == 0.0);
  CHECK(parse_loss_kind("mae") == LossKind::kMae);
  CHECK_THROWS(parse_loss_kind("huber"));
}

TEST_CASE("scalar linear adjoint decays exponentially backwards") {
  // u' = c u  gives  lambda' = -c lambda, so lambda(t) = lambda(T-) e^{c (T - t)}.
  const double c = -0.5;
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  ClosureModel m;
  m.base = linear_term({"u"}, {c});
  const HistoryFn h = HistoryFn::constant(bump(8, 1.0));
  const ForwardSolution s = integrate_forward(m, g, h, 0.0, 1.0, 0.01);
  const DataSet d = DataSet::full_field({1.0}, {Field::Zero(1, 8)}, LossKind::kMse);
  const AdjointStore a = integrate_adjoint(s, d, m, g);
  const std::size_t last = a.size() - 1;
  // Terminal condition: lambda(T+) = 0, jump of -J/h at T.
  CHECK(a.lambda_right(last).abs().maxCoeff() == 0.0);
  const Field j = loss_jump(s.u.value(last), d, 0);
  CHECK(((a.lambda_left(last) + j / g.h).abs()).maxCoeff() < 1e-14);
  for (double t : {0.0, 0.37, 0.8}) {
    const Field expect = a.lambda_left(last) * std::exp(c * (1.0 - t));
    CHECK((a.query_lambda(t) - expect).abs().maxCoeff() <
          1e-8 * expect.abs().maxCoeff());
  }
}

TEST_CASE("memory multiplier integrates lambda backwards") {
  // D = w (state independent): lambda stays at its terminal jump value and
  // mu(t) = (T - t) lambda.
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  ClosureModel m;
  m.memory = linear_term({"one"}, {0.3});
  m.tau = 0.2;
  const HistoryFn h = HistoryFn::constant(bump(8, 0.0));
  const ForwardSolution s = integrate_forward(m, g, h, 0.0, 1.0, 0.01);
  const DataSet d = DataSet::full_field({1.0}, {Field::Zero(1, 8)}, LossKind::kMse);
  const AdjointStore a = integrate_adjoint(s, d, m, g);
  const Field lam = a.lambda_left(a.size() - 1);
  for (std::size_t k : {std::size_t{0}, std::size_t{40}, std::size_t{99}}) {
    const double t = a.time(k);
    CHECK((a.mu(k) - (1.0 - t) * lam).abs().maxCoeff() < 1e-12);
    CHECK((a.lambda_right(k) - lam).abs().maxCoeff() < 1e-12);
  }
  CHECK(a.query_mu(1.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("gradients of constant closures match closed forms") {
  // Markovian F = a: u(T) = u0 + a T.  Memory D = b: u(T) = u0 + b tau T.
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  const double T = 0.6, tau = 0.1;
  ClosureModel m;
  m.markovian = linear_term({"one"}, {0.2});
  m.memory = linear_term({"one"}, {-0.4});
  m.tau = tau;
  const Field u0 = bump(8, 0.5);
  const Field target = bump(8, 0.2) * 1.1;
  const DataSet d = DataSet::full_field({T}, {target}, LossKind::kMse);
  const LossAndGradients lg =
      loss_and_gradients(m, g, HistoryFn::constant(u0), 0.0, T, 0.01, d);
  const Field uT = u0 + 0.2 * T - 0.4 * tau * T;
  const double mean_r = (uT - target).sum() / 8.0;
  CHECK(lg.loss == doctest::Approx((uT - target).square().sum() / 8.0).epsilon(1e-12));
  CHECK(lg.phi[0] == doctest::Approx(2.0 * mean_r * T).epsilon(1e-10));
  CHECK(lg.theta[0] == doctest::Approx(2.0 * mean_r * tau * T).epsilon(1e-10));
}

TEST_CASE("zero mismatch gives exactly zero gradients") {
  const Grid1D g = make_grid(0.0, 2.0 * std::numbers::pi, 8, BoundaryKind::kPeriodic);
  ClosureModel m;
  m.base = linear_term({"u_ux", "uxx"}, {-1.0, 0.05});
  m.markovian = linear_term({"u", "ux"}, {0.1, -0.2});
  m.memory = linear_term({"u"}, {0.5});
  m.tau = 0.04;
  const HistoryFn h = HistoryFn::constant(bump(8, 1.0));
  const ForwardSolution s = integrate_forward(m, g, h, 0.0, 0.2, 0.01);
  const DataSet d = DataSet::full_field({0.1, 0.2}, {s.u.value(10), s.u.value(20)},
                                        LossKind::kMse);
  const LossAndGradients lg = loss_and_gradients(m, g, h, 0.0, 0.2, 0.01, d);
  CHECK(lg.loss == 0.0);
  for (double v : lg.phi) CHECK(v == 0.0);
  for (double v : lg.theta) CHECK(v == 0.0);
}

TEST_CASE("Dirichlet adjoint gradient matches finite differences") {
  const Grid1D g = make_grid(0.0, 1.0, 12, BoundaryKind::kDirichletHomogeneous);
  ClosureModel m;
  m.base = linear_term({"uxx"}, {0.05});
  m.markovian = linear_term({"u", "ux", "uxx", "u_ux"}, {0.1, -0.3, 0.02, 0.4});
  Field u0(1, 12);
  for (int i = 0; i < 12; ++i) u0(0, i) = std::sin(std::numbers::pi * g.x(i));
  const HistoryFn h = HistoryFn::constant(u0);
  const double T = 0.1, dt = 1e-3;
  ClosureModel truth = m;
  truth.markovian.reset();
  const ForwardSolution ref = integrate_forward(truth, g, h, 0.0, T, dt);
  const DataSet d = DataSet::full_field({0.05, 0.1}, {ref.u.value(50), ref.u.value(100)},
                                        LossKind::kMse);
  const LossAndGradients lg = loss_and_gradients(m, g, h, 0.0, T, dt, d);
  auto loss = [&]() { return loss_eval(integrate_forward(m, g, h, 0.0, T, dt).u, d); };
  const double eps = 1e-6;
  for (std::size_t p = 0; p < 4; ++p) {
    auto w = m.markovian->net.params();
    const double o = w[p];
    w[p] = o + eps;
    const double lp = loss();
    w[p] = o - eps;
    const double lm = loss();
    w[p] = o;
    const double fd = (lp - lm) / (2 * eps);
    CAPTURE(p);
    CHECK(std::abs(lg.phi[p] - fd) < 1e-3 * std::abs(fd) + 1e-12);
  }
}

TEST_CASE("data sets are validated") {
  DataSet d = DataSet::full_field({0.1}, {Field::Zero(1, 4)}, LossKind::kMse);
  CHECK_NOTHROW(d.validate(4, 1));
  CHECK_THROWS(d.validate(4, 2));
  d.nodes[0] = {0, 7, 1, 2};
  CHECK_THROWS(d.validate(4, 1));
}

TEST_CASE("the adjoint does not differentiate the eddy-viscosity baseline") {
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  ClosureModel m;
  m.base = linear_term({"uxx"}, {0.1});
  m.markovian = linear_term({"u"}, {0.1});
  m.smagorinsky_cs = 0.1;
  const HistoryFn h = HistoryFn::constant(bump(8, 0.0));
  const DataSet d = DataSet::full_field({0.1}, {Field::Zero(1, 8)}, LossKind::kMse);
  CHECK_THROWS_AS(loss_and_gradients(m, g, h, 0.0, 0.1, 0.01, d), InvalidArgument);
}
