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

#include <cstdio>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "nclosure/error.hpp"
#include "nclosure/serialize.hpp"

using namespace nclosure;

TEST_CASE("network text round trip is bit-exact") {
  DenseNet net = presets::tracer_markovian_net(6.625, 5.625, 6.0, 1000.0);
  std::mt19937_64 rng(1);
  initialize(net, InitKind::kUniform, 0.3, rng);
  net.params()[7] = 1.0 / 3.0;
  net.apply_constraints();
  net.prune(0.05);
  const std::string text = dense_net_to_text(net);
  const DenseNet back = dense_net_from_text(text);
  REQUIRE(back.param_count() == net.param_count());
  for (std::size_t p = 0; p < net.param_count(); ++p) {
    CHECK(back.params()[p] == net.params()[p]);
    CHECK(back.prune_mask()[p] == net.prune_mask()[p]);
    CHECK(back.derived_mask()[p] == net.derived_mask()[p]);
  }
  CHECK(dense_net_to_text(back) == text);
}

TEST_CASE("output scale and output map survive serialization") {
  DenseNet a = presets::shock_memory_net(2);
  const DenseNet b = dense_net_from_text(dense_net_to_text(a));
  CHECK(b.output_scale().enabled);
  CHECK(b.output_scale().index == 2);
  const DenseNet m = dense_net_from_text(
      dense_net_to_text(presets::reduced_memory_net(1000.0)));
  REQUIRE(m.output_map().has_value());
  CHECK((*m.output_map())(4, 3) == 1.0 / 1000.0);
}

TEST_CASE("closure files") {
  ClosureModel model;
  model.base = make_base_term(1, {{0, "uxx", 0.1}});
  model.markovian = NetTerm{FeatureLibrary::parse({"u", "uxxx"}),
                            presets::interpretable_linear(2)};
  model.markovian->library.set_scales({2.0, 0.25});
  model.markovian->net.params()[1] = 0.0123;
  model.memory = NetTerm{FeatureLibrary::parse({"u", "ux", "uxx", "u2", "u_ux"}),
                         presets::shock_memory_net(0)};
  model.tau = 0.075;
  const auto path = std::filesystem::temp_directory_path() / "ncl_closure_test.json";
  save_closure(path.string(), model);
  ClosureModel back;
  back.base = model.base;
  load_closure(path.string(), back);
  std::filesystem::remove(path);
  REQUIRE(back.markovian.has_value());
  REQUIRE(back.memory.has_value());
  CHECK(back.tau == 0.075);
  CHECK(back.markovian->library.scales()[1] == 0.25);
  CHECK(back.markovian->net.params()[1] == 0.0123);
  CHECK(back.markovian->library.names() == model.markovian->library.names());
  CHECK(closure_to_text(back) == closure_to_text(model));
}

TEST_CASE("malformed input is rejected") {
  CHECK_THROWS(dense_net_from_text("not json"));
  CHECK_THROWS(dense_net_from_text(R"({"format":"other"})"));
  ClosureModel m;
  m.n_states = 2;
  ClosureModel one;
  one.markovian = NetTerm{FeatureLibrary::parse({"u"}), presets::interpretable_linear(1)};
  CHECK_THROWS(closure_from_text(closure_to_text(one), m));
  CHECK_THROWS_AS(read_text_file("/nonexistent/dir/file"), IoError);
}
