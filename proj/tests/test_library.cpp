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
#include "nclosure/library.hpp"
#include "nclosure/stencil.hpp"

using namespace nclosure;

namespace {

Grid1D ring(int n) {
  return make_grid(0.0, 2.0 * std::numbers::pi, n, BoundaryKind::kPeriodic);
}

Field sine(const Grid1D& g, double shift = 0.0) {
  Field u(1, g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) u(0, i) = shift + std::sin(g.x(i));
  return u;
}

}  // namespace

TEST_CASE("term parsing") {
  CHECK(parse_term("u_ux").kind == TermKind::kUUx);
  CHECK(parse_term("uxx@2").state == 2);
  CHECK(parse_term("uxx@2").name() == "uxx@2");
  CHECK(parse_term("one").name() == "one");
  CHECK(parse_term("uxxx").order() == 3);
  CHECK_FALSE(parse_term("x").reads_state());
  CHECK_THROWS_AS(parse_term("uxxxx"), InvalidArgument);
  CHECK_THROWS_AS(parse_term("u@-1"), InvalidArgument);
}

TEST_CASE("feature values") {
  const Grid1D g = ring(32);
  const Field u = sine(g, 1.0);
  const FeatureLibrary lib =
      FeatureLibrary::parse({"u", "u2", "ux", "u_ux", "uxx", "one", "x"});
  const Eigen::MatrixXd f = eval_features(lib, u, g, 0.3);
  REQUIRE(f.rows() == 7);
  const Eigen::ArrayXd ux = spatial_derivative(u.row(0).transpose().eval(), 1, g);
  const Eigen::ArrayXd uxx = spatial_derivative(u.row(0).transpose().eval(), 2, g);
  for (int i = 0; i < 32; ++i) {
    CHECK(f(0, i) == u(0, i));
    CHECK(f(1, i) == doctest::Approx(u(0, i) * u(0, i)));
    CHECK(f(2, i) == ux(i));
    CHECK(f(3, i) == doctest::Approx(u(0, i) * ux(i)));
    CHECK(f(4, i) == uxx(i));
    CHECK(f(5, i) == 1.0);
    CHECK(f(6, i) == g.x(i));
  }
  CHECK(lib.max_order() == 2);
}

TEST_CASE("feature partials") {
  const Grid1D g = ring(16);
  const Field u = sine(g, 0.5);
  const FeatureLibrary lib = FeatureLibrary::parse({"u2", "u_ux", "u_uxx", "uxxx"});
  const LocalFields lf = compute_local_fields(u, g);
  const FeaturePartials p = lib.partials(lf);
  for (int i = 0; i < 16; ++i) {
    CHECK(p.slot[0](0, i) == doctest::Approx(2.0 * u(0, i)));
    CHECK(p.slot[0](1, i) == lf.d[1](0, i));
    CHECK(p.slot[1](1, i) == u(0, i));
    CHECK(p.slot[0](2, i) == lf.d[2](0, i));
    CHECK(p.slot[2](2, i) == u(0, i));
    CHECK(p.slot[3](3, i) == 1.0);
    CHECK(p.slot[1](3, i) == 0.0);
  }
}

TEST_CASE("feature scales multiply values and partials") {
  const Grid1D g = ring(16);
  const Field u = sine(g);
  FeatureLibrary lib = FeatureLibrary::parse({"u", "ux"});
  const Eigen::MatrixXd f0 = lib.eval(compute_local_fields(u, g), 0.0);
  lib.set_scales({2.0, 0.5});
  const LocalFields lf = compute_local_fields(u, g);
  const Eigen::MatrixXd f1 = lib.eval(lf, 0.0);
  CHECK((f1.row(0) - 2.0 * f0.row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((f1.row(1) - 0.5 * f0.row(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(lib.partials(lf).slot[1](1, 3) == 0.5);
  CHECK_THROWS(lib.set_scales({1.0}));
  CHECK_THROWS(lib.set_scales({1.0, 0.0}));
}

TEST_CASE("multi-state features read their own state") {
  const Grid1D g = ring(8);
  Field u(2, 8);
  u.row(0).setConstant(1.0);
  u.row(1).setConstant(3.0);
  const FeatureLibrary lib = FeatureLibrary::parse({"u@1", "u"});
  const Eigen::MatrixXd f = eval_features(lib, u, g, 0.0);
  CHECK(f(0, 4) == 3.0);
  CHECK(f(1, 4) == 1.0);
  CHECK(lib.max_state() == 1);
  // Contraction routes cotangents to the state each term reads.
  const auto out = lib.contract(lib.partials(compute_local_fields(u, g)),
                                Eigen::MatrixXd::Ones(2, 8), 2);
  CHECK(out[0](0, 0) == 1.0);
  CHECK(out[0](1, 0) == 1.0);
}
