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

#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "nclosure/nclosure.h"

TEST_CASE("version and status names") {
  CHECK(std::string(ncl_version()) == "0.1.0");
  CHECK(std::string(ncl_status_name(NCL_OK)) == "ok");
  CHECK(std::string(ncl_status_name(NCL_ERR_BLOW_UP)) == "blow-up");
}

TEST_CASE("config errors carry a message") {
  ncl_config* cfg = nullptr;
  CHECK(ncl_config_parse("{ nope", &cfg) == NCL_ERR_CONFIG);
  CHECK(cfg == nullptr);
  CHECK(std::strlen(ncl_last_error()) > 0);
  CHECK(ncl_config_load("/nonexistent.json", &cfg) == NCL_ERR_IO);
  CHECK(ncl_config_parse(nullptr, &cfg) == NCL_ERR_INVALID_ARGUMENT);
  ncl_config_free(nullptr);
}

TEST_CASE("preset networks through the C interface") {
  struct Want { const char* name; size_t total, effective; };
  for (const Want& w : {Want{"shock_memory", 198, 198}, Want{"reduced_memory", 65, 65},
                        Want{"reduced_markovian", 20, 4},
                        Want{"tracer_markovian", 36, 18}}) {
    CAPTURE(w.name);
    ncl_net* net = nullptr;
    REQUIRE(ncl_net_preset(w.name, &net) == NCL_OK);
    size_t total = 0, eff = 0;
    CHECK(ncl_net_param_counts(net, &total, &eff) == NCL_OK);
    CHECK(total == w.total);
    CHECK(eff == w.effective);
    ncl_net_free(net);
  }
  ncl_net* bad = nullptr;
  CHECK(ncl_net_preset("nope", &bad) == NCL_ERR_INVALID_ARGUMENT);
}

TEST_CASE("forward evaluation is column-major") {
  ncl_net* net = nullptr;
  REQUIRE(ncl_net_preset("reduced_memory", &net) == NCL_OK);
  size_t n_in = 0, n_out = 0;
  REQUIRE(ncl_net_shape(net, &n_in, &n_out) == NCL_OK);
  CHECK(n_in == 4);
  CHECK(n_out == 5);
  // Zero weights: zero output.
  std::vector<double> x(4 * 3, 0.7), y(5 * 3, 1.0);
  CHECK(ncl_net_forward(net, x.data(), 3, y.data()) == NCL_OK);
  for (double v : y) CHECK(v == 0.0);
  CHECK(ncl_net_forward(net, nullptr, 3, y.data()) == NCL_ERR_INVALID_ARGUMENT);
  ncl_net_free(net);
}

TEST_CASE("protocol arithmetic") {
  int n = 0;
  CHECK(ncl_iterations_per_epoch(100, 4, 3, &n) == NCL_OK);
  CHECK(n == 10);
  CHECK(ncl_iterations_per_epoch(0, 4, 3, &n) == NCL_ERR_INVALID_ARGUMENT);
  CHECK(ncl_lr_at(4, 0.075, 0.97, 4.0) == doctest::Approx(0.07275).epsilon(1e-15));
}

TEST_CASE("gradcheck through the C interface") {
  ncl_config* cfg = nullptr;
  REQUIRE(ncl_config_load(NCL_SOURCE_DIR "/configs/gradcheck_linear.json", &cfg) ==
          NCL_OK);
  REQUIRE(ncl_config_set_out_dir(cfg, "ncl_capi_gradcheck") == NCL_OK);
  double err = -1.0;
  CHECK(ncl_gradcheck(cfg, &err) == NCL_OK);
  CHECK(err < 1e-3);
  CHECK(std::string(ncl_last_summary()).find("max rel err") != std::string::npos);
  CHECK(ncl_evaluate(cfg, nullptr, "sideways") == NCL_ERR_CONFIG);
  ncl_config_free(cfg);
}
