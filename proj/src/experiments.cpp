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

// Command drivers: each runs one subcommand end to end and writes its CSV
// and weight files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nclosure/error.hpp"
#include "nclosure/scenario.hpp"
#include "nclosure/serialize.hpp"

namespace nclosure {

namespace {

namespace fs = std::filesystem;

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw IoError("cannot write '" + p.string() + "'");
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<SnapshotSeries> all_data(const ExperimentConfig& cfg) {
  std::vector<SnapshotSeries> out;
  for (const ScenarioConfig& sc : cfg.scenarios) {
    out.push_back(generate_snapshots(sc, cfg.seed));
  }
  return out;
}

struct Windows {
  const char* name;
  double from;
  double to;
};

std::vector<Windows> windows_of(const ScenarioConfig& sc) {
  return {{"train", 0.0, sc.data.t_train},
          {"val", sc.data.t_train, sc.data.t_val},
          {"future", sc.data.t_val, sc.data.t_future}};
}

/// Rows `scenario,window,method,rmse` for continuous rollouts from t = 0.
void write_comparison(const fs::path& path, const ExperimentConfig& cfg,
                      const std::vector<SnapshotSeries>& data,
                      const Closure& learned, bool with_smagorinsky,
                      std::ostringstream& summary) {
  std::ofstream out = open_out(path);
  out << "scenario,window,method,rmse\n";
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    const ScenarioConfig& sc = cfg.scenarios[i];
    const Scenario scen = make_scenario(sc, data[i]);
    struct Method {
      const char* name;
      ClosureModel model;
    };
    std::vector<Method> methods;
    methods.push_back({"none", assemble_model(scen, Closure{})});
    methods.push_back({"learned", assemble_model(scen, learned)});
    if (with_smagorinsky) {
      methods.push_back(
          {"smagorinsky", assemble_model(scen, Closure{}, cfg.smagorinsky_cs)});
    }
    for (const Method& m : methods) {
      const RolloutError e = rollout_error(m.model, sc.grid, sc.dt, data[i]);
      for (const Windows& w : windows_of(sc)) {
        const double r = window_rmse(e, w.from, w.to);
        out << sc.name << ',' << w.name << ',' << m.name << ',' << fmt(r)
            << '\n';
        if (std::string(w.name) == "val") {
          summary << sc.name << " val rmse " << m.name << " = " << fmt(r)
                  << "\n";
        }
      }
    }
  }
}

}  // namespace

std::string run_generate_data(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.out_dir);
  std::ostringstream summary;
  for (const ScenarioConfig& sc : cfg.scenarios) {
    const SnapshotSeries s = generate_snapshots(sc, cfg.seed);
    const fs::path sub = prepare_dir((dir / sc.name).string());
    write_field_csv((sub / "dataset.csv").string(), sc.grid, s);
    summary << sc.name << ": " << s.size() << " snapshots on "
            << sc.grid.n_nodes << " nodes -> " << (sub / "dataset.csv").string()
            << "\n";
  }
  return summary.str();
}

std::string run_train(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg.out_dir);
  const std::vector<SnapshotSeries> data = all_data(cfg);
  std::vector<Scenario> scenarios;
  for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
    scenarios.push_back(make_scenario(cfg.scenarios[i], data[i]));
  }
  std::mt19937_64 rng(cfg.seed);
  Closure closure = build_closure(cfg, rng, data);
  for (const ScenarioConfig& sc : cfg.scenarios) {
    if (closure.memory) step_count(closure.tau, sc.dt, "tau / model step");
  }

  auto save = [&](const fs::path& p, const Closure& c) {
    ClosureModel m;
    m.n_states = cfg.scenarios.front().n_states;
    m.markovian = c.markovian;
    m.memory = c.memory;
    m.tau = c.tau;
    save_closure(p.string(), m);
  };
  save(dir / "weights_epoch_0.txt", closure);
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  const TrainResult res =
      train_run(scenarios, closure, tc, [&](const EpochRecord& r, const Closure& c) {
        save(dir / ("weights_epoch_" + std::to_string(r.epoch) + ".txt"), c);
      });
  write_loss_csv((dir / "losses.csv").string(), res.curve);
  save(dir / "weights_final.txt", closure);

  std::ostringstream summary;
  if (!res.curve.empty()) {
    const EpochRecord& last = res.curve.back();
    summary << "epochs " << last.epoch << ", iterations " << last.iter
            << ", train loss " << fmt(last.train_loss) << ", val loss "
            << fmt(last.val_loss) << ", pruned " << last.n_pruned
            << ", skipped " << last.n_skipped << "\n";
  }
  write_comparison(dir / "metrics.csv", cfg, data, closure,
                   cfg.kind == ExperimentKind::kExp1b, summary);

  if (cfg.kind == ExperimentKind::kExp1a) {
    std::ofstream out = open_out(dir / "coefficients.csv");
    out << "term,coefficient,pruned\n";
    for (const CoefficientRow& r : linear_coefficients(closure)) {
      out << r.term << ',' << fmt(r.coefficient) << ',' << (r.pruned ? 1 : 0)
          << '\n';
      summary << "  " << r.term << " = " << fmt(r.coefficient)
              << (r.pruned ? " (pruned)" : "") << "\n";
    }
  }
  if (cfg.kind == ExperimentKind::kConstrained) {
    const ConservationReport rep = conservation_report(
        cfg.scenarios.front(), closure, data.front(), cfg.seed);
    std::ofstream out = open_out(dir / "conservation.csv");
    out << "metric,value\n"
        << "model,synthetic_tracer_surrogate\n"
        << "max_identity_residual," << fmt(rep.max_identity_residual) << '\n'
        << "drift_base," << fmt(rep.drift_base) << '\n'
        << "drift_closed," << fmt(rep.drift_closed) << '\n'
        << "drift_gap_rel," << fmt(rep.drift_gap_rel) << '\n';
    summary << "conservation: identity residual "
            << fmt(rep.max_identity_residual) << ", drift gap (rel) "
            << fmt(rep.drift_gap_rel) << "\n";
  }
  return summary.str();
}

std::string run_evaluate(const ExperimentConfig& cfg,
                         const std::string& weights_path,
                         const std::string& window_name) {
  const fs::path dir = prepare_dir(cfg.out_dir);
  std::ofstream out = open_out(dir / "metrics.csv");
  out << "scenario,t,rmse\n";
  std::ostringstream summary;
  for (const ScenarioConfig& sc : cfg.scenarios) {
    double from = 0.0, to = sc.data.t_future;
    if (window_name == "train") {
      to = sc.data.t_train;
    } else if (window_name == "val") {
      from = sc.data.t_train;
      to = sc.data.t_val;
    } else if (window_name == "future") {
      from = sc.data.t_val;
    } else if (window_name != "all") {
      throw ConfigError("unknown window '" + window_name + "'");
    }
    const SnapshotSeries data = generate_snapshots(sc, cfg.seed);
    const SnapshotSeries truth = window(data, from, to, true);
    ClosureModel model;
    model.n_states = sc.n_states;
    model.base = scenario_base(sc);
    if (!weights_path.empty() && weights_path != "none") {
      load_closure(weights_path, model);
    }
    if (truth.size() < 2) {
      summary << sc.name << ": empty window\n";
      continue;
    }
    const SnapshotSeries past = window(data, 0.0, from, true);
    const HistoryFn hist = model.memory && past.size() > 1
                               ? HistoryFn::data_interpolant(past.times, past.fields)
                               : HistoryFn::constant(truth.fields.front());
    const RolloutError e = rollout_error(model, sc.grid, sc.dt, truth, &hist);
    // The start snapshot is the initial condition, not a prediction.
    for (std::size_t i = 1; i < e.times.size(); ++i) {
      out << sc.name << ',' << fmt(e.times[i]) << ',' << fmt(e.rmse[i]) << '\n';
    }
    summary << sc.name << " " << window_name << " window rmse "
            << fmt(window_rmse(e, from, to)) << "\n";
  }
  return summary.str();
}

std::string run_gradcheck(const ExperimentConfig& cfg, double* max_rel_err) {
  const fs::path dir = prepare_dir(cfg.out_dir);
  const GradcheckReport rep = gradcheck(cfg);
  std::ofstream out = open_out(dir / "gradcheck.csv");
  out << "param_id,adjoint_grad,fd_grad,rel_err\n";
  for (const GradcheckRow& r : rep.rows) {
    out << r.param_id << ',' << fmt(r.adjoint) << ',' << fmt(r.fd) << ','
        << fmt(r.rel_err) << '\n';
  }
  if (max_rel_err) *max_rel_err = rep.max_rel_err;
  std::ostringstream summary;
  summary << rep.rows.size() << " parameters checked, max rel err "
          << fmt(rep.max_rel_err) << "\n";
  return summary.str();
}

}  // namespace nclosure
