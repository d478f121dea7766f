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

#include "nclosure/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "nclosure/adjoint.hpp"
#include "nclosure/error.hpp"
#include "nclosure/serialize.hpp"

namespace nclosure {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scenario geometry and initial conditions

Field InitialCondition::evaluate(const Grid1D& grid, int n_states) const {
  Field u = Field::Zero(n_states, grid.n_nodes);
  for (int s = 0; s < n_states && s < static_cast<int>(offset.size()); ++s) {
    u.row(s).setConstant(offset[static_cast<std::size_t>(s)]);
  }
  const double two_pi = 2.0 * std::numbers::pi;
  for (const FourierMode& m : modes) {
    if (m.state < 0 || m.state >= n_states) {
      throw ConfigError("initial-condition mode refers to a missing state");
    }
    for (int i = 0; i < grid.n_nodes; ++i) {
      const double xi = (grid.x(i) - grid.x_min) / grid.length();
      u(m.state, i) += m.a * std::sin(two_pi * m.k * xi) +
                       m.b * std::cos(two_pi * m.k * xi);
    }
  }
  return u;
}

Grid1D ScenarioConfig::hifi_grid() const {
  return make_grid(grid.x_min, grid.x_max, hifi_nodes, grid.bc);
}

int ScenarioConfig::restriction_factor() const {
  const int coarse = grid.periodic() ? grid.n_nodes : grid.n_nodes - 1;
  const int fine = grid.periodic() ? hifi_nodes : hifi_nodes - 1;
  if (fine < coarse || fine % coarse != 0) {
    throw ConfigError("scenario '" + name +
                      "': high-fidelity grid must refine the model grid by "
                      "an integer factor");
  }
  return fine / coarse;
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "generic") return ExperimentKind::kGeneric;
  if (name == "exp1a") return ExperimentKind::kExp1a;
  if (name == "exp1b") return ExperimentKind::kExp1b;
  if (name == "constrained") return ExperimentKind::kConstrained;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kGeneric: return "generic";
    case ExperimentKind::kExp1a: return "exp1a";
    case ExperimentKind::kExp1b: return "exp1b";
    case ExperimentKind::kConstrained: return "constrained";
  }
  return "generic";
}

void ExperimentConfig::validate() const {
  if (scenarios.empty()) throw ConfigError("config lists no scenarios");
  for (const ScenarioConfig& sc : scenarios) {
    sc.restriction_factor();
    if (!(sc.dt > 0.0) || !(sc.hifi_dt > 0.0) || !(sc.data.dt > 0.0)) {
      throw ConfigError("scenario '" + sc.name + "': steps must be positive");
    }
    step_count(sc.data.dt, sc.dt, "data step / model step");
    step_count(sc.data.dt, sc.hifi_dt, "data step / high-fidelity step");
    if (!(sc.data.t_train > 0.0) || sc.data.t_val < sc.data.t_train ||
        sc.data.t_future < sc.data.t_val) {
      throw ConfigError("scenario '" + sc.name +
                        "': windows need 0 < t_train <= t_val <= t_future");
    }
    if (sc.data.noise < 0.0) throw ConfigError("noise must be non-negative");
  }
  if (kind == ExperimentKind::kExp1b && scenarios.size() < 2) {
    throw ConfigError("exp1b needs at least two scenarios");
  }
  if (memory && tau <= 0.0 && tau_steps <= 0) {
    throw ConfigError("memory closure needs tau or tau_steps");
  }
  if (smagorinsky_cs < 0.0) throw ConfigError("smagorinsky_cs is negative");
  train.validate();
}

// ---------------------------------------------------------------------------
// JSON parsing

namespace {

std::vector<BaseTermSpec> parse_terms(const json& j) {
  std::vector<BaseTermSpec> out;
  for (const json& t : j) {
    BaseTermSpec b;
    b.state = t.value("state", 0);
    b.term = t.at("term").get<std::string>();
    b.coef = t.at("coef").get<double>();
    parse_term(b.term);
    out.push_back(std::move(b));
  }
  return out;
}

ScenarioConfig parse_scenario(const json& j) {
  ScenarioConfig sc;
  sc.name = j.value("name", "scenario");
  sc.n_states = j.value("n_states", 1);
  const json& g = j.at("grid");
  sc.grid = make_grid(g.at("x_min").get<double>(), g.at("x_max").get<double>(),
                      g.at("n_nodes").get<int>(),
                      parse_boundary_kind(g.value("bc", "periodic")));
  sc.hifi_nodes = j.value("hifi_nodes", sc.grid.n_nodes);
  sc.base = parse_terms(j.value("base_model", json::array()));
  sc.true_extra = parse_terms(j.value("true_extra", json::array()));
  const json& ic = j.at("initial_condition");
  if (ic.value("type", "fourier") != "fourier") {
    throw ConfigError("only fourier initial conditions are supported");
  }
  const json off = ic.value("offset", json(0.0));
  if (off.is_array()) {
    sc.ic.offset = off.get<std::vector<double>>();
  } else {
    sc.ic.offset.assign(static_cast<std::size_t>(sc.n_states), off.get<double>());
  }
  for (const json& m : ic.value("modes", json::array())) {
    sc.ic.modes.push_back({m.value("state", 0), m.at("k").get<double>(),
                           m.value("a", 0.0), m.value("b", 0.0)});
  }
  sc.dt = j.at("dt").get<double>();
  sc.hifi_dt = j.value("hifi_dt", sc.dt);
  const json& d = j.at("data");
  sc.data.dt = d.at("dt").get<double>();
  sc.data.t_train = d.at("t_train").get<double>();
  sc.data.t_val = d.value("t_val", sc.data.t_train);
  sc.data.t_future = d.value("t_future", sc.data.t_val);
  sc.data.noise = d.value("noise", 0.0);
  return sc;
}

NetSpec parse_net(const json& j) {
  NetSpec n;
  n.library = j.at("library").get<std::vector<std::string>>();
  n.preset = j.value("preset", "");
  for (const json& l : j.value("layers", json::array())) {
    n.layers.push_back({l.at("out").get<int>(),
                        parse_activation(l.value("activation", "linear"))});
  }
  if (j.contains("output_scale") && !j.at("output_scale").is_null()) {
    n.output_scale = j.at("output_scale").get<int>();
  }
  n.feature_scaling = j.value("feature_scaling", std::string("none"));
  if (n.feature_scaling != "none" && n.feature_scaling != "rms") {
    throw ConfigError("feature_scaling must be 'none' or 'rms'");
  }
  if (j.contains("init")) {
    n.init = parse_init_kind(j.at("init").value("kind", "glorot_uniform"));
    n.init_scale = j.at("init").value("scale", 1.0);
  }
  static const char* const kPresets[] = {"interpretable_linear", "shock_memory",
                                         "tracer_markovian", "reduced_markovian",
                                         "reduced_memory"};
  if (!n.preset.empty() &&
      std::find(std::begin(kPresets), std::end(kPresets), n.preset) ==
          std::end(kPresets)) {
    throw ConfigError("unknown network preset '" + n.preset + "'");
  }
  try {
    FeatureLibrary::parse(n.library);
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("closure library: ") + e.what());
  }
  if (n.preset.empty() && n.layers.empty()) {
    throw ConfigError("closure network needs a preset or layers");
  }
  return n;
}

TrainConfig parse_train(const json& j) {
  TrainConfig t;
  t.batch_time = j.value("batch_time", t.batch_time);
  t.stride = j.value("stride", t.stride);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.epochs = j.value("epochs", t.epochs);
  t.iters_per_epoch = j.value("iters_per_epoch", t.iters_per_epoch);
  t.lr0 = j.value("lr0", t.lr0);
  t.decay_rate = j.value("decay_rate", t.decay_rate);
  t.decay_steps = j.value("decay_steps", t.decay_steps);
  t.l1 = j.value("l1", t.l1);
  t.l2 = j.value("l2", t.l2);
  t.prune_threshold = j.value("prune_threshold", t.prune_threshold);
  t.loss = parse_loss_kind(j.value("loss", std::string("mse")));
  t.rho = j.value("rho", t.rho);
  t.eps = j.value("eps", t.eps);
  t.block_size = j.value("block_size", t.block_size);
  t.skip_budget = j.value("skip_budget", t.skip_budget);
  return t;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    cfg.kind = parse_experiment_kind(j.value("experiment", "generic"));
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.seed = j.value("seed", std::uint64_t{0});
    for (const json& s : j.at("scenarios")) {
      cfg.scenarios.push_back(parse_scenario(s));
    }
    const json closure = j.value("closure", json::object());
    if (closure.contains("markovian")) {
      cfg.markovian = parse_net(closure.at("markovian"));
    }
    if (closure.contains("memory")) cfg.memory = parse_net(closure.at("memory"));
    cfg.tau = closure.value("tau", 0.0);
    cfg.tau_steps = closure.value("tau_steps", 0);
    if (closure.contains("constants")) {
      const json& c = closure.at("constants");
      cfg.tracer.c_p = c.value("c_p", cfg.tracer.c_p);
      cfg.tracer.c_z = c.value("c_z", cfg.tracer.c_z);
      cfg.tracer.c_d = c.value("c_d", cfg.tracer.c_d);
      cfg.tracer.rho_w = c.value("rho_w", cfg.tracer.rho_w);
    }
    cfg.train = parse_train(j.value("train", json::object()));
    cfg.train.seed = cfg.seed;
    cfg.smagorinsky_cs = j.value("smagorinsky_cs", cfg.smagorinsky_cs);
    if (j.contains("gradcheck")) {
      const json& g = j.at("gradcheck");
      cfg.gradcheck.dt = g.value("dt", cfg.gradcheck.dt);
      cfg.gradcheck.n_steps = g.value("n_steps", cfg.gradcheck.n_steps);
      cfg.gradcheck.epsilon = g.value("epsilon", cfg.gradcheck.epsilon);
      cfg.gradcheck.data_every = g.value("data_every", cfg.gradcheck.data_every);
      cfg.gradcheck.floor_fraction =
          g.value("floor_fraction", cfg.gradcheck.floor_fraction);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config(read_text_file(path));
}

// ---------------------------------------------------------------------------
// Data

std::optional<NetTerm> scenario_base(const ScenarioConfig& sc) {
  if (sc.base.empty()) return std::nullopt;
  return make_base_term(sc.n_states, sc.base);
}

SnapshotSeries generate_snapshots(const ScenarioConfig& sc,
                                  std::uint64_t seed) {
  const Grid1D fine = sc.hifi_grid();
  const int r = sc.restriction_factor();
  std::vector<BaseTermSpec> truth_terms = sc.base;
  truth_terms.insert(truth_terms.end(), sc.true_extra.begin(),
                     sc.true_extra.end());
  ClosureModel truth;
  truth.n_states = sc.n_states;
  if (!truth_terms.empty()) truth.base = make_base_term(sc.n_states, truth_terms);

  const Field u0 = sc.ic.evaluate(fine, sc.n_states);
  const std::size_t n_data =
      step_count(sc.data.t_future, sc.data.dt, "t_future / data step");
  const std::size_t per = step_count(sc.data.dt, sc.hifi_dt, "data step");
  const ForwardSolution sol = integrate_forward(
      truth, fine, HistoryFn::constant(u0), 0.0,
      static_cast<double>(n_data) * sc.data.dt, sc.hifi_dt);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  SnapshotSeries out;
  for (std::size_t k = 0; k <= n_data; ++k) {
    const Field& f = sol.u.value(k * per);
    Field c(sc.n_states, sc.grid.n_nodes);
    for (int i = 0; i < sc.grid.n_nodes; ++i) c.col(i) = f.col(i * r);
    if (sc.data.noise > 0.0) {
      for (Eigen::Index s = 0; s < c.rows(); ++s) {
        for (Eigen::Index i = 0; i < c.cols(); ++i) {
          c(s, i) += sc.data.noise * noise(rng);
        }
      }
    }
    out.times.push_back(static_cast<double>(k) * sc.data.dt);
    out.fields.push_back(std::move(c));
  }
  return out;
}

SnapshotSeries window(const SnapshotSeries& s, double from, double to,
                      bool include_start) {
  SnapshotSeries out;
  const double tol = time_tolerance(to);
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double t = s.times[i];
    const bool after = include_start ? t >= from - tol : t > from + tol;
    if (after && t <= to + tol) {
      out.times.push_back(t);
      out.fields.push_back(s.fields[i]);
    }
  }
  return out;
}

Scenario make_scenario(const ScenarioConfig& sc, const SnapshotSeries& data) {
  Scenario s;
  s.name = sc.name;
  s.grid = sc.grid;
  s.n_states = sc.n_states;
  s.base = scenario_base(sc);
  s.dt = sc.dt;
  s.train = window(data, 0.0, sc.data.t_train, true);
  s.val = window(data, sc.data.t_train, sc.data.t_val, false);
  return s;
}

// ---------------------------------------------------------------------------
// Closure construction

namespace {

DenseNet build_net(const NetSpec& spec, const TracerConstants& tc) {
  const int n_in = static_cast<int>(spec.library.size());
  DenseNet net;
  if (spec.preset.empty()) {
    net = DenseNet(n_in, spec.layers);
  } else if (spec.preset == "interpretable_linear") {
    net = presets::interpretable_linear(n_in, 1);
  } else if (spec.preset == "shock_memory") {
    net = presets::shock_memory_net(spec.output_scale.value_or(0));
  } else if (spec.preset == "tracer_markovian") {
    net = presets::tracer_markovian_net(tc.c_p, tc.c_z, tc.c_d, tc.rho_w);
  } else if (spec.preset == "reduced_markovian") {
    net = presets::reduced_markovian_net(tc.c_z, tc.rho_w);
  } else if (spec.preset == "reduced_memory") {
    net = presets::reduced_memory_net(tc.rho_w);
  } else {
    throw ConfigError("unknown network preset '" + spec.preset + "'");
  }
  if (net.n_in() != n_in) {
    throw ConfigError("network input width " + std::to_string(net.n_in()) +
                      " does not match library size " + std::to_string(n_in));
  }
  if (spec.output_scale && spec.preset.empty()) {
    net.set_output_scale({true, *spec.output_scale});
  }
  return net;
}

}  // namespace

std::vector<double> feature_rms(const FeatureLibrary& lib,
                                const std::vector<Grid1D>& grids,
                                const std::vector<SnapshotSeries>& data) {
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(lib.size());
  double count = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < data[i].size(); ++k) {
      const Eigen::MatrixXd f = lib.eval(
          compute_local_fields(data[i].fields[k], grids[i], lib.max_order()),
          data[i].times[k]);
      sum += f.array().square().rowwise().sum();
      count += static_cast<double>(f.cols());
    }
  }
  std::vector<double> out(static_cast<std::size_t>(lib.size()), 1.0);
  if (count == 0.0) return out;
  for (Eigen::Index j = 0; j < sum.size(); ++j) {
    const double rms = std::sqrt(sum(j) / count);
    if (rms > 0.0 && std::isfinite(rms)) {
      out[static_cast<std::size_t>(j)] = rms;
    }
  }
  return out;
}

namespace {

NetTerm build_term(const NetSpec& spec, const ExperimentConfig& cfg,
                   std::mt19937_64& rng,
                   const std::vector<SnapshotSeries>& train_data) {
  NetTerm t{FeatureLibrary::parse(spec.library), build_net(spec, cfg.tracer)};
  if (spec.feature_scaling == "rms") {
    if (train_data.size() != cfg.scenarios.size()) {
      throw ConfigError("rms feature scaling needs training data");
    }
    std::vector<Grid1D> grids;
    std::vector<SnapshotSeries> windows;
    for (std::size_t i = 0; i < cfg.scenarios.size(); ++i) {
      grids.push_back(cfg.scenarios[i].grid);
      windows.push_back(
          window(train_data[i], 0.0, cfg.scenarios[i].data.t_train, true));
    }
    std::vector<double> rms = feature_rms(t.library, grids, windows);
    for (double& r : rms) r = 1.0 / r;
    t.library.set_scales(std::move(rms));
  }
  initialize(t.net, spec.init, spec.init_scale, rng);
  return t;
}

}  // namespace

Closure build_closure(const ExperimentConfig& cfg, std::mt19937_64& rng,
                      const std::vector<SnapshotSeries>& train_data) {
  Closure c;
  if (cfg.markovian) {
    c.markovian = build_term(*cfg.markovian, cfg, rng, train_data);
  }
  if (cfg.memory) c.memory = build_term(*cfg.memory, cfg, rng, train_data);
  c.tau = cfg.tau_steps > 0
              ? cfg.tau_steps * cfg.scenarios.front().dt
              : cfg.tau;
  return c;
}

// ---------------------------------------------------------------------------
// Rollouts

double rmse(const Field& a, const Field& b) {
  return std::sqrt((a - b).square().mean());
}

RolloutError rollout_error(const ClosureModel& model, const Grid1D& grid,
                           double dt, const SnapshotSeries& truth,
                           const HistoryFn* history) {
  RolloutError e;
  e.times = truth.times;
  if (truth.empty()) return e;
  const HistoryFn hist =
      history ? *history : HistoryFn::constant(truth.fields.front());
  const double t0 = truth.times.front();
  try {
    const ForwardSolution sol =
        integrate_forward(model, grid, hist, t0, truth.times.back(), dt);
    Field u;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      sol.u.query_into(truth.times[i], u);
      e.rmse.push_back(rmse(u, truth.fields[i]));
    }
  } catch (const BlowUp& b) {
    // Snapshots past the failure stay infinite; earlier ones are rescored
    // from a solve that stops short of it.
    const double t_fail = b.time();
    std::size_t n_ok = 0;
    while (n_ok < truth.size() && truth.times[n_ok] < t_fail) ++n_ok;
    e.rmse.assign(truth.size(), std::numeric_limits<double>::infinity());
    if (n_ok > 1) {
      const double dt_span = truth.times[n_ok - 1] - t0;
      const std::size_t steps = static_cast<std::size_t>(std::floor(dt_span / dt + 0.5));
      const ForwardSolution sol = integrate_forward(
          model, grid, hist, t0, t0 + static_cast<double>(steps) * dt, dt);
      Field u;
      for (std::size_t i = 0; i < n_ok; ++i) {
        sol.u.query_into(truth.times[i], u);
        e.rmse[i] = rmse(u, truth.fields[i]);
      }
    } else if (n_ok == 1) {
      e.rmse[0] = 0.0;
    }
  }
  return e;
}

double window_rmse(const RolloutError& e, double from, double to) {
  double sum = 0.0;
  int n = 0;
  const double tol = time_tolerance(to);
  for (std::size_t i = 0; i < e.times.size(); ++i) {
    if (e.times[i] > from + tol && e.times[i] <= to + tol) {
      sum += e.rmse[i] * e.rmse[i];
      ++n;
    }
  }
  return n > 0 ? std::sqrt(sum / n) : std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// Gradient check

GradcheckReport gradcheck(const ExperimentConfig& cfg, double dt_override) {
  const ScenarioConfig& sc = cfg.scenarios.front();
  const double dt = dt_override > 0.0 ? dt_override : cfg.gradcheck.dt;
  // A refined step keeps the horizon, data times and tau fixed in physical time.
  const double ratio_f = cfg.gradcheck.dt / dt;
  const auto ratio = static_cast<int>(std::lround(ratio_f));
  if (ratio < 1 || std::abs(ratio_f - ratio) > 1e-9 * ratio_f)
    throw InvalidArgument("gradcheck dt override must divide the base dt");
  // Reference data: the true model on the model grid at the check step, so
  // the loss has a nonzero mismatch whenever the closure is imperfect.
  ScenarioConfig ref = sc;
  ref.hifi_nodes = sc.grid.n_nodes;
  ref.dt = dt;
  ref.hifi_dt = dt;
  ref.data.noise = 0.0;
  const int every = cfg.gradcheck.data_every * ratio;
  const std::size_t n_steps =
      static_cast<std::size_t>(cfg.gradcheck.n_steps) * static_cast<std::size_t>(ratio);
  ref.data.dt = every * dt;
  ref.data.t_future = static_cast<double>(n_steps / static_cast<std::size_t>(every)) *
                      ref.data.dt;
  const SnapshotSeries snaps = generate_snapshots(ref, cfg.seed);
  const double t_end = static_cast<double>(n_steps) * dt;
  std::vector<double> times;
  std::vector<Field> fields;
  for (std::size_t i = 1; i < snaps.size(); ++i) {
    times.push_back(static_cast<double>(i) * static_cast<double>(every) * dt);
    fields.push_back(snaps.fields[i]);
  }
  const DataSet data = DataSet::full_field(times, fields, cfg.train.loss);

  std::mt19937_64 rng(cfg.seed);
  std::vector<SnapshotSeries> scaling_data(cfg.scenarios.size(), snaps);
  Closure closure = build_closure(cfg, rng, scaling_data);
  if (cfg.tau_steps > 0) closure.tau = cfg.tau_steps * cfg.gradcheck.dt;

  Scenario scen;
  scen.grid = sc.grid;
  scen.n_states = sc.n_states;
  scen.base = scenario_base(sc);
  scen.dt = dt;
  ClosureModel model = assemble_model(scen, closure);
  const HistoryFn hist = HistoryFn::constant(snaps.fields.front());
  const LossAndGradients lg =
      loss_and_gradients(model, sc.grid, hist, 0.0, t_end, dt, data);

  auto loss_at = [&]() {
    const ForwardSolution s =
        integrate_forward(model, sc.grid, hist, 0.0, t_end, dt);
    return loss_eval(s.u, data);
  };

  GradcheckReport rep;
  auto check = [&](NetTerm& term, std::vector<double> grad,
                   const std::string& tag) {
    DenseNet& net = term.net;
    for (const ConstraintSpec& c : net.constraints()) {
      const auto l = static_cast<std::size_t>(c.layer);
      Eigen::Map<RowMatrix> g(grad.data() + net.layer_offset(l),
                              net.layer_out(l), net.layer_in(l));
      project_constraint_grads(c, g);
    }
    const std::size_t first = rep.rows.size();
    double fd_max = 0.0;
    const double eps = cfg.gradcheck.epsilon;
    for (std::size_t p = 0; p < net.param_count(); ++p) {
      if (!net.trainable(p)) continue;
      const double orig = net.params()[p];
      net.params()[p] = orig + eps;
      net.apply_constraints();
      const double lp = loss_at();
      net.params()[p] = orig - eps;
      net.apply_constraints();
      const double lm = loss_at();
      net.params()[p] = orig;
      net.apply_constraints();
      GradcheckRow row;
      row.param_id = tag + "." + net.param_name(p);
      row.adjoint = grad[p];
      row.fd = (lp - lm) / (2.0 * eps);
      fd_max = std::max(fd_max, std::abs(row.fd));
      rep.rows.push_back(std::move(row));
    }
    const double floor = cfg.gradcheck.floor_fraction * fd_max;
    for (std::size_t i = first; i < rep.rows.size(); ++i) {
      GradcheckRow& r = rep.rows[i];
      const double denom = std::max(std::abs(r.fd), floor);
      r.rel_err = denom > 0.0 ? std::abs(r.adjoint - r.fd) / denom
                              : std::abs(r.adjoint - r.fd);
      rep.max_rel_err = std::max(rep.max_rel_err, r.rel_err);
    }
  };
  if (model.markovian) check(*model.markovian, lg.phi, "markovian");
  if (model.memory) check(*model.memory, lg.theta, "memory");
  return rep;
}

// ---------------------------------------------------------------------------
// Reports

std::vector<CoefficientRow> linear_coefficients(const Closure& closure) {
  if (!closure.markovian) throw ConfigError("no Markovian closure to report");
  const NetTerm& t = *closure.markovian;
  if (t.net.n_layers() != 1 || t.net.layer_out(0) != 1 ||
      t.net.activation(0) != Activation::kLinear || t.net.output_map() ||
      t.net.output_scale().enabled) {
    throw ConfigError("coefficient report needs a single linear output");
  }
  std::vector<CoefficientRow> rows;
  const auto names = t.library.names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    rows.push_back({names[j], t.net.params()[j] * t.library.scales()[j],
                    t.net.prune_mask()[j] != 0});
  }
  return rows;
}

ConservationReport conservation_report(const ScenarioConfig& sc,
                                       const Closure& closure,
                                       const SnapshotSeries& data,
                                       std::uint64_t seed) {
  if (!closure.markovian || closure.markovian->net.n_out() < 4) {
    throw ConfigError("conservation report needs a tied tracer closure");
  }
  ConservationReport rep;
  const DenseNet& net = closure.markovian->net;
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Eigen::MatrixXd x(net.n_in(), 256);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = dist(rng);
  }
  auto residual = [](const Eigen::MatrixXd& y) {
    return y.topRows(4).colwise().sum().cwiseAbs().maxCoeff();
  };
  rep.max_identity_residual = residual(net.forward(x));

  Scenario scen = make_scenario(sc, data);
  ClosureModel base_only = assemble_model(scen, Closure{});
  ClosureModel closed = assemble_model(scen, closure);
  const Field& u0 = data.fields.front();
  const double t_end = data.times.back();
  const HistoryFn hist = HistoryFn::constant(u0);
  auto total = [](const Field& u) { return u.topRows(4).sum(); };
  const ForwardSolution a =
      integrate_forward(base_only, sc.grid, hist, 0.0, t_end, sc.dt);
  const ForwardSolution b =
      integrate_forward(closed, sc.grid, hist, 0.0, t_end, sc.dt);
  const double total0 = total(u0);
  rep.drift_base = total(a.u.value(a.u.size() - 1)) - total0;
  rep.drift_closed = total(b.u.value(b.u.size() - 1)) - total0;
  rep.drift_gap_rel = std::abs(rep.drift_closed - rep.drift_base) /
                      std::max(std::abs(total0), 1e-300);
  for (std::size_t k = 0; k < b.u.size(); k += 16) {
    const LocalFields lf = compute_local_fields(
        b.u.value(k), sc.grid, closure.markovian->library.max_order());
    const Eigen::MatrixXd y = net.forward(
        closure.markovian->library.eval(lf, b.u.time(k)));
    rep.max_identity_residual = std::max(rep.max_identity_residual, residual(y));
  }
  return rep;
}

}  // namespace nclosure
