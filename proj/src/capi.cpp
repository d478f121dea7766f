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

#include "nclosure/nclosure.h"

#include <exception>
#include <new>
#include <string>

#include "nclosure/error.hpp"
#include "nclosure/scenario.hpp"
#include "nclosure/serialize.hpp"

struct ncl_config {
  nclosure::ExperimentConfig cfg;
};

struct ncl_net {
  nclosure::DenseNet net;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_summary;

ncl_status status_of(nclosure::ErrorKind k) {
  switch (k) {
    case nclosure::ErrorKind::kInvalidArgument: return NCL_ERR_INVALID_ARGUMENT;
    case nclosure::ErrorKind::kOutOfRange: return NCL_ERR_OUT_OF_RANGE;
    case nclosure::ErrorKind::kBlowUp: return NCL_ERR_BLOW_UP;
    case nclosure::ErrorKind::kConfig: return NCL_ERR_CONFIG;
    case nclosure::ErrorKind::kIo: return NCL_ERR_IO;
  }
  return NCL_ERR_INTERNAL;
}

template <class F>
ncl_status guarded(F&& f) {
  try {
    g_error.clear();
    f();
    return NCL_OK;
  } catch (const nclosure::Error& e) {
    g_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_error = "out of memory";
  } catch (const std::exception& e) {
    g_error = e.what();
  } catch (...) {
    g_error = "unknown failure";
  }
  return NCL_ERR_INTERNAL;
}

ncl_status null_arg(const char* what) {
  g_error = std::string("null argument: ") + what;
  return NCL_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* ncl_version(void) { return "0.1.0"; }
const char* ncl_last_error(void) { return g_error.c_str(); }
const char* ncl_last_summary(void) { return g_summary.c_str(); }

const char* ncl_status_name(ncl_status s) {
  switch (s) {
    case NCL_OK: return "ok";
    case NCL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NCL_ERR_OUT_OF_RANGE: return "out of range";
    case NCL_ERR_BLOW_UP: return "blow-up";
    case NCL_ERR_CONFIG: return "config error";
    case NCL_ERR_IO: return "i/o error";
    case NCL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

ncl_status ncl_config_load(const char* path, ncl_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new ncl_config{nclosure::load_config(path)}; });
}

ncl_status ncl_config_parse(const char* json_text, ncl_config** out) {
  if (!json_text) return null_arg("json_text");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded(
      [&] { *out = new ncl_config{nclosure::parse_config(json_text)}; });
}

void ncl_config_free(ncl_config* cfg) { delete cfg; }

ncl_status ncl_config_set_seed(ncl_config* cfg, uint64_t seed) {
  if (!cfg) return null_arg("cfg");
  cfg->cfg.seed = seed;
  cfg->cfg.train.seed = seed;
  return NCL_OK;
}

ncl_status ncl_config_set_out_dir(ncl_config* cfg, const char* dir) {
  if (!cfg) return null_arg("cfg");
  if (!dir || !*dir) return null_arg("dir");
  cfg->cfg.out_dir = dir;
  return NCL_OK;
}

ncl_status ncl_generate_data(const ncl_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { g_summary = nclosure::run_generate_data(cfg->cfg); });
}

ncl_status ncl_train(const ncl_config* cfg) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] { g_summary = nclosure::run_train(cfg->cfg); });
}

ncl_status ncl_evaluate(const ncl_config* cfg, const char* weights_path,
                        const char* window) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    g_summary = nclosure::run_evaluate(cfg->cfg,
                                       weights_path ? weights_path : "none",
                                       window ? window : "all");
  });
}

ncl_status ncl_gradcheck(const ncl_config* cfg, double* max_rel_err) {
  if (!cfg) return null_arg("cfg");
  return guarded([&] {
    g_summary = nclosure::run_gradcheck(cfg->cfg, max_rel_err);
  });
}

ncl_status ncl_net_load(const char* path, ncl_net** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = new ncl_net{
        nclosure::dense_net_from_text(nclosure::read_text_file(path))};
  });
}

ncl_status ncl_net_preset(const char* name, ncl_net** out) {
  if (!name) return null_arg("name");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    namespace p = nclosure::presets;
    const nclosure::TracerConstants tc;
    const std::string n = name;
    nclosure::DenseNet net;
    if (n == "shock_memory") {
      net = p::shock_memory_net();
    } else if (n == "reduced_memory") {
      net = p::reduced_memory_net(tc.rho_w);
    } else if (n == "reduced_markovian") {
      net = p::reduced_markovian_net(tc.c_z, tc.rho_w);
    } else if (n == "tracer_markovian") {
      net = p::tracer_markovian_net(tc.c_p, tc.c_z, tc.c_d, tc.rho_w);
    } else if (n == "interpretable_linear") {
      net = p::interpretable_linear();
    } else {
      throw nclosure::InvalidArgument("unknown preset '" + n + "'");
    }
    *out = new ncl_net{std::move(net)};
  });
}

void ncl_net_free(ncl_net* net) { delete net; }

ncl_status ncl_net_shape(const ncl_net* net, size_t* n_in, size_t* n_out) {
  if (!net) return null_arg("net");
  if (n_in) *n_in = static_cast<size_t>(net->net.n_in());
  if (n_out) *n_out = static_cast<size_t>(net->net.n_out());
  return NCL_OK;
}

ncl_status ncl_net_param_counts(const ncl_net* net, size_t* total,
                                size_t* effective) {
  if (!net) return null_arg("net");
  if (total) *total = net->net.param_count();
  if (effective) *effective = net->net.effective_param_count();
  return NCL_OK;
}

ncl_status ncl_net_forward(const ncl_net* net, const double* x,
                           size_t n_samples, double* y) {
  if (!net) return null_arg("net");
  if (!x) return null_arg("x");
  if (!y) return null_arg("y");
  return guarded([&] {
    const auto n = static_cast<Eigen::Index>(n_samples);
    const Eigen::Map<const Eigen::MatrixXd> xin(x, net->net.n_in(), n);
    Eigen::Map<Eigen::MatrixXd> yout(y, net->net.n_out(), n);
    yout = net->net.forward(Eigen::MatrixXd(xin));
  });
}

ncl_status ncl_iterations_per_epoch(int n_steps, int batch_size,
                                    int batch_time, int* out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = nclosure::iterations_per_epoch(n_steps, batch_size, batch_time);
  });
}

double ncl_lr_at(long iter, double lr0, double decay_rate,
                 double decay_steps) {
  return nclosure::lr_at(iter, lr0, decay_rate, decay_steps);
}

}  // extern "C"
