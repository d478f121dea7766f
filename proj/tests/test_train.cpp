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
#include <set>

#include "doctest.h"
#include "nclosure/error.hpp"
#include "nclosure/train.hpp"

using namespace nclosure;

namespace {

// Snapshots of u' = k u on a small ring, u0 = 1 + 0.3 sin.
SnapshotSeries decay_series(double k, double t0, int n, double dt) {
  const Grid1D g = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  SnapshotSeries s;
  for (int j = 0; j < n; ++j) {
    const double t = t0 + dt * j;
    Field f(1, 8);
    for (int i = 0; i < 8; ++i) {
      f(0, i) = (1.0 + 0.3 * std::sin(6.283185307179586 * g.x(i))) * std::exp(k * t);
    }
    s.times.push_back(t);
    s.fields.push_back(f);
  }
  return s;
}

Scenario decay_scenario() {
  Scenario sc;
  sc.name = "decay";
  sc.grid = make_grid(0.0, 1.0, 8, BoundaryKind::kPeriodic);
  sc.dt = 0.01;
  sc.train = decay_series(-0.3, 0.0, 21, 0.05);
  sc.val = decay_series(-0.3, 1.05, 10, 0.05);
  return sc;
}

Closure one_weight_closure() {
  Closure c;
  c.markovian = NetTerm{FeatureLibrary::parse({"u"}), presets::interpretable_linear(1)};
  return c;
}

}  // namespace

TEST_CASE("iterations per epoch") {
  CHECK(iterations_per_epoch(100, 4, 3) == 10);
  CHECK(iterations_per_epoch(48, 16, 3) == 2);
  CHECK(iterations_per_epoch(1, 1, 1) == 2);
  CHECK_THROWS(iterations_per_epoch(0, 1, 1));
}

TEST_CASE("learning-rate decay") {
  CHECK(lr_at(0, 0.075, 0.97, 4) == 0.075);
  CHECK(lr_at(4, 0.075, 0.97, 4) == doctest::Approx(0.07275).epsilon(1e-15));
  CHECK(lr_at(2, 0.075, 0.97, 4) == doctest::Approx(0.075 * std::sqrt(0.97)));
}

TEST_CASE("RMSprop step") {
  std::vector<double> p{1.0, 1.0}, g{1.0, 1.0};
  OptimState st(2, 0.9, 1e-8);
  const std::vector<std::uint8_t> frozen{0, 1};
  rmsprop_step(p, g, st, 0.1, frozen);
  // v = 0.1, step = 0.1 / (sqrt(0.1) + 1e-8).
  CHECK(p[0] == doctest::Approx(0.6837722439831617).epsilon(1e-15));
  CHECK(p[1] == 1.0);
  CHECK(st.iter == 1);
  CHECK(st.v[1] == 0.0);
}

TEST_CASE("L1 and L2 penalties") {
  std::vector<double> g{0.0, 0.0, 0.0, 0.0}, p{0.5, -0.5, 0.0, 0.5};
  const std::vector<std::uint8_t> pruned{0, 0, 0, 1};
  add_regularization(g, p, 1.5e-3, 1e-5, pruned);
  CHECK(g[0] == doctest::Approx(0.00151));
  CHECK(g[1] == doctest::Approx(-0.00151));
  CHECK(g[2] == 0.0);
  CHECK(g[3] == 0.0);
}

TEST_CASE("batch sampling") {
  const SnapshotSeries s = decay_series(-0.3, 0.0, 10, 0.1);
  CHECK(sequence_starts(s, 3) == 8);
  TrainConfig cfg;
  cfg.batch_time = 3;
  cfg.stride = 2;
  cfg.batch_size = 5;
  std::mt19937_64 r1(4), r2(4);
  const auto a = sample_batch(s, cfg, r1);
  const auto b = sample_batch(s, cfg, r2);
  REQUIRE(a.size() == 5);
  std::set<std::size_t> starts;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    starts.insert(a[i].start);
    // stride 2 with three snapshots: one target two steps ahead.
    REQUIRE(a[i].data.size() == 1);
    CHECK(a[i].data.times[0] == s.times[a[i].start + 2]);
    CHECK(a[i].t_end == a[i].data.times[0]);
  }
  CHECK(starts.size() == 5);
  // More sequences requested than exist: clamp.
  cfg.batch_size = 50;
  CHECK(sample_batch(s, cfg, r1).size() == 8);
  cfg.batch_time = 11;
  CHECK_THROWS_AS(sample_batch(s, cfg, r1), ConfigError);
}

TEST_CASE("training recovers a linear decay rate and is deterministic") {
  const std::vector<Scenario> scs{decay_scenario()};
  TrainConfig cfg;
  cfg.batch_time = 3;
  cfg.batch_size = 4;
  cfg.epochs = 20;
  cfg.iters_per_epoch = 10;
  cfg.lr0 = 0.02;
  cfg.decay_rate = 0.9;
  cfg.decay_steps = 20;
  cfg.seed = 11;
  Closure c1 = one_weight_closure(), c2 = one_weight_closure();
  int calls = 0;
  const TrainResult r1 =
      train_run(scs, c1, cfg, [&](const EpochRecord&, const Closure&) { ++calls; });
  const TrainResult r2 = train_run(scs, c2, cfg);
  CHECK(calls == 20);
  REQUIRE(r1.curve.size() == 20);
  CHECK(r1.curve.back().train_loss < 0.01 * r1.curve.front().train_loss);
  CHECK(r1.curve.back().val_loss < r1.curve.front().val_loss);
  CHECK(std::abs(c1.markovian->net.params()[0] + 0.3) < 0.01);
  CHECK(c1.markovian->net.params()[0] == c2.markovian->net.params()[0]);
  for (std::size_t e = 0; e < r1.curve.size(); ++e) {
    CHECK(r1.curve[e].train_loss == r2.curve[e].train_loss);
    CHECK(r1.curve[e].val_loss == r2.curve[e].val_loss);
  }
}

TEST_CASE("pruning during training freezes weights at zero") {
  const std::vector<Scenario> scs{decay_scenario()};
  Closure c;
  c.markovian = NetTerm{FeatureLibrary::parse({"u", "ux"}), presets::interpretable_linear(2)};
  c.markovian->net.params()[1] = 1e-4;
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.epochs = 2;
  cfg.iters_per_epoch = 3;
  cfg.lr0 = 1e-3;
  cfg.prune_threshold = 5e-3;
  const TrainResult r = train_run(scs, c, cfg);
  CHECK(r.curve.back().n_pruned >= 1);
  CHECK(c.markovian->net.prune_mask()[1] == 1);
  CHECK(c.markovian->net.params()[1] == 0.0);
}

TEST_CASE("configuration checks") {
  TrainConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.stride = 3;  // no target inside a three-snapshot sequence
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = TrainConfig{};
  cfg.lr0 = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Closure empty;
  CHECK_THROWS_AS(train_run({decay_scenario()}, empty, TrainConfig{}), ConfigError);
}
