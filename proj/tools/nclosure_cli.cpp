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

// nclosure command-line tool. Talks to the library only through its C API.

#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "nclosure/nclosure.h"

namespace {

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  bool has_seed = false;
  std::string out_dir;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "-s,--seed",
      [&c](const std::uint64_t& v) {
        c.seed = v;
        c.has_seed = true;
      },
      "override the config seed");
  cmd->add_option("-o,--out-dir", c.out_dir, "override the output directory");
}

int fail(const char* what, ncl_status s) {
  std::fprintf(stderr, "nclosure: %s failed (%s): %s\n", what,
               ncl_status_name(s), ncl_last_error());
  return static_cast<int>(s) + 1;
}

/// Loads the config and applies overrides; returns nullptr after reporting.
ncl_config* open_config(const Common& c, int& rc) {
  ncl_config* cfg = nullptr;
  ncl_status s = ncl_config_load(c.config.c_str(), &cfg);
  if (s != NCL_OK) {
    rc = fail("loading config", s);
    return nullptr;
  }
  if (c.has_seed) ncl_config_set_seed(cfg, c.seed);
  if (!c.out_dir.empty()) ncl_config_set_out_dir(cfg, c.out_dir.c_str());
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Neural closure models for 1D partial delay differential "
               "equations, trained with continuous adjoints."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ncl_version()));

  Common gen_opts, train_opts, eval_opts, grad_opts;
  std::string weights = "none";
  std::string window = "all";

  CLI::App* gen = app.add_subcommand(
      "generate-data", "integrate the true model and write dataset.csv");
  add_common(gen, gen_opts);

  CLI::App* train = app.add_subcommand(
      "train", "train the closure; writes losses.csv, metrics.csv, weights");
  add_common(train, train_opts);

  CLI::App* eval = app.add_subcommand(
      "evaluate", "roll out a trained closure; writes metrics.csv");
  add_common(eval, eval_opts);
  eval->add_option("-w,--weights", weights,
                   "closure weight file, or 'none' for the base model");
  eval->add_option("--window", window, "train, val, future or all")
      ->check(CLI::IsMember({"train", "val", "future", "all"}));

  CLI::App* grad = app.add_subcommand(
      "gradcheck", "adjoint gradients vs finite differences; gradcheck.csv");
  add_common(grad, grad_opts);

  CLI11_PARSE(app, argc, argv);

  int rc = 0;
  ncl_status s = NCL_OK;
  const char* what = "";
  ncl_config* cfg = nullptr;
  if (gen->parsed()) {
    if (!(cfg = open_config(gen_opts, rc))) return rc;
    what = "generate-data";
    s = ncl_generate_data(cfg);
  } else if (train->parsed()) {
    if (!(cfg = open_config(train_opts, rc))) return rc;
    what = "train";
    s = ncl_train(cfg);
  } else if (eval->parsed()) {
    if (!(cfg = open_config(eval_opts, rc))) return rc;
    what = "evaluate";
    s = ncl_evaluate(cfg, weights.c_str(), window.c_str());
  } else if (grad->parsed()) {
    if (!(cfg = open_config(grad_opts, rc))) return rc;
    what = "gradcheck";
    double max_rel = 0.0;
    s = ncl_gradcheck(cfg, &max_rel);
  }
  ncl_config_free(cfg);
  if (s != NCL_OK) return fail(what, s);
  std::fputs(ncl_last_summary(), stdout);
  return 0;
}
