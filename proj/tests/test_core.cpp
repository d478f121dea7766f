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
#include <sstream>

#include "doctest.h"
#include "nclosure/core.hpp"
#include "nclosure/error.hpp"

using namespace nclosure;

TEST_CASE("grid spacing depends on the boundary kind") {
  const Grid1D p = make_grid(0.0, 1.0, 10, BoundaryKind::kPeriodic);
  const Grid1D d = make_grid(0.0, 1.0, 11, BoundaryKind::kDirichletHomogeneous);
  CHECK(p.h == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(d.h == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(d.x(10) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_grid(0.0, 1.0, 4, BoundaryKind::kPeriodic),
                  InvalidArgument);
  CHECK_THROWS_AS(make_grid(1.0, 0.0, 8, BoundaryKind::kPeriodic),
                  InvalidArgument);
  CHECK(parse_boundary_kind(to_string(BoundaryKind::kDirichletHomogeneous)) ==
        BoundaryKind::kDirichletHomogeneous);
}

TEST_CASE("cubic Hermite reproduces cubics") {
  // p(t) = t^3 on [0, 1]: p0 = 0, m0 = 0, p1 = 1, m1 = 3.
  Field p0 = Field::Zero(1, 1), m0 = Field::Zero(1, 1);
  Field p1 = Field::Constant(1, 1, 1.0), m1 = Field::Constant(1, 1, 3.0);
  Field out;
  hermite_into(0.0, 1.0, 0.25, p0, m0, p1, m1, out);
  CHECK(out(0, 0) == doctest::Approx(0.015625).epsilon(1e-14));
  hermite_into(0.0, 1.0, 0.5, p0, m0, p1, m1, out);
  CHECK(out(0, 0) == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("history functions") {
  Field a = Field::Constant(1, 3, 1.0);
  Field b = Field::Constant(1, 3, 3.0);
  const HistoryFn c = HistoryFn::constant(a);
  CHECK(c(-5.0)(0, 2) == 1.0);
  const HistoryFn h = HistoryFn::data_interpolant({-1.0, 0.0}, {a, b});
  CHECK(h(-0.5)(0, 1) == doctest::Approx(2.0));
  CHECK(h(-3.0)(0, 0) == 1.0);
  CHECK(h(2.0)(0, 0) == 3.0);
  CHECK(h.kind() == HistoryFn::Kind::kDataInterpolant);
}

TEST_CASE("trajectory store interpolates with Hermite data and falls back to history") {
  Field h0 = Field::Constant(1, 2, -7.0);
  TrajectoryStore s(HistoryFn::constant(h0), 0.5);
  // u(t) = t^2, du = 2t: Hermite is exact for quadratics.
  for (int k = 0; k <= 4; ++k) {
    const double t = 0.25 * k;
    s.append(t, Field::Constant(1, 2, t * t), Field::Constant(1, 2, 2 * t));
  }
  CHECK(s.query(0.3)(0, 0) == doctest::Approx(0.09).epsilon(1e-14));
  CHECK(s.query(1.0)(0, 1) == doctest::Approx(1.0));
  CHECK(s.query(-0.2)(0, 0) == -7.0);
  CHECK_THROWS(s.append(0.5, h0, h0));
  CHECK_THROWS_AS(s.query(1.5), OutOfRange);
}

TEST_CASE("non-finite fields raise BlowUp with the time attached") {
  Field f = Field::Zero(1, 4);
  CHECK_NOTHROW(require_finite(f, 0.0, "u"));
  f(0, 2) = std::numeric_limits<double>::quiet_NaN();
  try {
    require_finite(f, 1.5, "u");
    FAIL("expected BlowUp");
  } catch (const BlowUp& e) {
    CHECK(e.time() == 1.5);
    CHECK(e.kind() == ErrorKind::kBlowUp);
  }
}

TEST_CASE("field CSV round trip is exact") {
  const Grid1D g = make_grid(0.0, 1.0, 6, BoundaryKind::kPeriodic);
  SnapshotSeries s;
  for (int k = 0; k < 3; ++k) {
    Field f(2, 6);
    for (int i = 0; i < 6; ++i) {
      f(0, i) = std::sin(0.1 * i + k) / 3.0;
      f(1, i) = std::exp(-0.3 * i) * std::numbers::pi;
    }
    s.times.push_back(0.1 * k);
    s.fields.push_back(f);
  }
  std::stringstream ss;
  write_field_csv(ss, g, s);
  const SnapshotSeries r = read_field_csv(ss, 6);
  REQUIRE(r.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(r.times[k] == s.times[k]);
    CHECK((r.fields[k] == s.fields[k]).all());
  }
}
