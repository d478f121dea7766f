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

#include "nclosure/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "nclosure/error.hpp"

namespace nclosure {

void TrainConfig::validate() const {
  if (batch_time < 2) throw ConfigError("batch_time must be at least 2");
  if (stride != 1 && stride != 2) throw ConfigError("stride must be 1 or 2");
  if (stride > batch_time - 1) {
    throw ConfigError("stride leaves no target inside the sequence");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (iters_per_epoch < 0) throw ConfigError("iters_per_epoch is negative");
  if (!(lr0 > 0.0) || !(decay_rate > 0.0) || !(decay_steps > 0.0)) {
    throw ConfigError("learning-rate schedule values must be positive");
  }
  if (l1 < 0.0 || l2 < 0.0 || prune_threshold < 0.0) {
    throw ConfigError("penalties and prune threshold must be non-negative");
  }
  if (!(rho > 0.0 && rho < 1.0) || !(eps > 0.0)) {
    throw ConfigError("RMSprop needs 0 < rho < 1 and eps > 0");
  }
  if (block_size < 1) throw ConfigError("block_size must be positive");
  if (skip_budget < 0) throw ConfigError("skip_budget is negative");
}

int iterations_per_epoch(int n_steps, int batch_size, int batch_time) {
  if (n_steps < 1 || batch_size < 1 || batch_time < 1) {
    throw InvalidArgument("iterations_per_epoch needs positive inputs");
  }
  const long bs = static_cast<long>(batch_size) * batch_time;
  return static_cast<int>((n_steps + bs - 1) / bs + 1);
}

double lr_at(long iter, double lr0, double decay_rate, double decay_steps) {
  return lr0 * std::pow(decay_rate, static_cast<double>(iter) / decay_steps);
}

void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  OptimState& st, double lr,
                  std::span<const std::uint8_t> frozen) {
  if (grads.size() != params.size() || st.v.size() != params.size() ||
      (!frozen.empty() && frozen.size() != params.size())) {
    throw InvalidArgument("rmsprop_step: size mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    const double g = grads[i];
    st.v[i] = st.rho * st.v[i] + (1.0 - st.rho) * g * g;
    params[i] -= lr * g / (std::sqrt(st.v[i]) + st.eps);
  }
  ++st.iter;
}

void add_regularization(std::span<double> grads,
                        std::span<const double> params, double l1, double l2,
                        std::span<const std::uint8_t> pruned) {
  if (grads.size() != params.size() ||
      (!pruned.empty() && pruned.size() != params.size())) {
    throw InvalidArgument("add_regularization: size mismatch");
  }
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!pruned.empty() && pruned[i]) continue;
    const double p = params[i];
    const double sign = p > 0.0 ? 1.0 : (p < 0.0 ? -1.0 : 0.0);
    grads[i] += l1 * sign + 2.0 * l2 * p;
  }
}

ClosureModel assemble_model(const Scenario& sc, const Closure& closure,
                            double smagorinsky_cs) {
  ClosureModel m;
  m.n_states = sc.n_states;
  m.base = sc.base;
  m.markovian = closure.markovian;
  m.memory = closure.memory;
  m.tau = closure.tau;
  m.smagorinsky_cs = smagorinsky_cs;
  m.validate();
  return m;
}

std::size_t sequence_starts(const SnapshotSeries& series, int batch_time) {
  const auto need = static_cast<std::size_t>(batch_time);
  return series.size() >= need ? series.size() - need + 1 : 0;
}

HistoryFn series_history(const SnapshotSeries& series) {
  return HistoryFn::data_interpolant(series.times, series.fields);
}

std::vector<Sequence> sample_batch(const SnapshotSeries& series,
                                   const TrainConfig& cfg,
                                   std::mt19937_64& rng) {
  const std::size_t n_starts = sequence_starts(series, cfg.batch_time);
  if (n_starts == 0) {
    throw ConfigError("training window shorter than one sequence");
  }
  const std::size_t b =
      std::min(n_starts, static_cast<std::size_t>(cfg.batch_size));
  // Partial Fisher-Yates: the first b entries are a uniform draw without
  // replacement.
  std::vector<std::size_t> idx(n_starts);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < b; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_starts - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }

  std::vector<Sequence> out;
  out.reserve(b);
  const auto span = static_cast<std::size_t>(cfg.batch_time - 1);
  for (std::size_t i = 0; i < b; ++i) {
    Sequence s;
    s.start = idx[i];
    s.t_start = series.times[s.start];
    s.t_end = series.times[s.start + span];
    s.initial = series.fields[s.start];
    std::vector<double> times;
    std::vector<Field> fields;
    for (std::size_t off = static_cast<std::size_t>(cfg.stride); off <= span;
         off += static_cast<std::size_t>(cfg.stride)) {
      times.push_back(series.times[s.start + off]);
      fields.push_back(series.fields[s.start + off]);
    }
    // Targets may stop short of the last snapshot; integrate only that far.
    s.t_end = times.back();
    s.data = DataSet::full_field(std::move(times), fields, cfg.loss);
    out.push_back(std::move(s));
  }
  return out;
}

double rollout_loss(const Scenario& sc, const ClosureModel& model,
                    LossKind loss) {
  if (sc.val.empty() || sc.train.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double t0 = sc.train.times.back();
  const HistoryFn hist = model.memory
                             ? series_history(sc.train)
                             : HistoryFn::constant(sc.train.fields.back());
  const DataSet data = DataSet::full_field(sc.val.times, sc.val.fields, loss);
  try {
    const ForwardSolution sol = integrate_forward(
        model, sc.grid, hist, t0, sc.val.times.back(), sc.dt);
    return loss_eval(sol.u, data);
  } catch (const BlowUp&) {
    return std::numeric_limits<double>::infinity();
  }
}

namespace {

void update_term(NetTerm& term, std::vector<double> grad, OptimState& st,
                 double lr, const TrainConfig& cfg) {
  DenseNet& net = term.net;
  add_regularization(grad, net.params(), cfg.l1, cfg.l2, net.prune_mask());
  for (const ConstraintSpec& c : net.constraints()) {
    const auto l = static_cast<std::size_t>(c.layer);
    Eigen::Map<RowMatrix> g(grad.data() + net.layer_offset(l),
                            net.layer_out(l), net.layer_in(l));
    project_constraint_grads(c, g);
  }
  std::vector<std::uint8_t> frozen(net.param_count());
  for (std::size_t p = 0; p < frozen.size(); ++p) {
    frozen[p] = net.trainable(p) ? 0 : 1;
  }
  rmsprop_step(net.params(), grad, st, lr, frozen);
  net.apply_constraints();
  if (cfg.prune_threshold > 0.0) net.prune(cfg.prune_threshold);
}

std::size_t total_pruned(const Closure& c) {
  std::size_t n = 0;
  if (c.markovian) n += c.markovian->net.n_pruned();
  if (c.memory) n += c.memory->net.n_pruned();
  return n;
}

void accumulate(std::vector<double>& acc, const std::vector<double>& g) {
  if (acc.empty()) acc.assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
}

}  // namespace

TrainResult train_run(const std::vector<Scenario>& scenarios, Closure& closure,
                      const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (scenarios.empty()) throw ConfigError("no training scenarios");
  if (!closure.markovian && !closure.memory) {
    throw ConfigError("nothing to train: closure has no network");
  }
  int n_total = 0;
  for (const Scenario& sc : scenarios) {
    if (sequence_starts(sc.train, cfg.batch_time) == 0) {
      throw ConfigError("scenario '" + sc.name +
                        "': training window shorter than one sequence");
    }
    n_total += static_cast<int>(sc.train.size());
  }
  const int iters = cfg.iters_per_epoch > 0
                        ? cfg.iters_per_epoch
                        : iterations_per_epoch(n_total, cfg.batch_size,
                                               cfg.batch_time);

  std::mt19937_64 rng(cfg.seed);
  OptimState st_phi, st_theta;
  if (closure.markovian) {
    st_phi = OptimState(closure.markovian->net.param_count(), cfg.rho, cfg.eps);
  }
  if (closure.memory) {
    st_theta = OptimState(closure.memory->net.param_count(), cfg.rho, cfg.eps);
  }

  TrainResult result;
  long iter = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int it = 0; it < iters; ++it, ++iter) {
      const std::size_t si =
          static_cast<std::size_t>(iter / cfg.block_size) % scenarios.size();
      const Scenario& sc = scenarios[si];
      const ClosureModel model = assemble_model(sc, closure);
      const std::vector<Sequence> batch = sample_batch(sc.train, cfg, rng);
      const HistoryFn mem_hist = series_history(sc.train);

      std::vector<double> g_phi, g_theta;
      double batch_loss = 0.0;
      bool blew_up = false;
      for (const Sequence& s : batch) {
        try {
          const HistoryFn hist =
              model.memory ? mem_hist : HistoryFn::constant(s.initial);
          const LossAndGradients r = loss_and_gradients(
              model, sc.grid, hist, s.t_start, s.t_end, sc.dt, s.data);
          batch_loss += r.loss;
          accumulate(g_phi, r.phi);
          accumulate(g_theta, r.theta);
        } catch (const BlowUp&) {
          blew_up = true;
          break;
        }
      }
      if (blew_up) {
        if (++result.n_skipped > cfg.skip_budget) {
          throw BlowUp(0.0, "training exceeded its blow-up skip budget");
        }
        continue;
      }
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (double& g : g_phi) g *= inv_b;
      for (double& g : g_theta) g *= inv_b;
      loss_sum += batch_loss * inv_b;
      ++loss_count;

      const double lr = lr_at(iter, cfg.lr0, cfg.decay_rate, cfg.decay_steps);
      if (closure.markovian) {
        update_term(*closure.markovian, std::move(g_phi), st_phi, lr, cfg);
      }
      if (closure.memory) {
        update_term(*closure.memory, std::move(g_theta), st_theta, lr, cfg);
      }
    }

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.iter = iter;
    rec.train_loss = loss_count > 0
                         ? loss_sum / loss_count
                         : std::numeric_limits<double>::quiet_NaN();
    double val = 0.0;
    int n_val = 0;
    for (const Scenario& sc : scenarios) {
      if (sc.val.empty()) continue;
      val += rollout_loss(sc, assemble_model(sc, closure), cfg.loss);
      ++n_val;
    }
    rec.val_loss = n_val > 0 ? val / n_val
                             : std::numeric_limits<double>::quiet_NaN();
    rec.lr = lr_at(iter, cfg.lr0, cfg.decay_rate, cfg.decay_steps);
    rec.n_pruned = total_pruned(closure);
    rec.n_skipped = result.n_skipped;
    result.curve.push_back(rec);
    if (on_epoch) on_epoch(rec, closure);
  }
  return result;
}

void write_loss_csv(const std::string& path,
                    const std::vector<EpochRecord>& curve) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "epoch,iter,train_loss,val_loss,lr,n_pruned,n_skipped\n";
  char buf[256];
  for (const EpochRecord& r : curve) {
    std::snprintf(buf, sizeof buf, "%d,%ld,%.17g,%.17g,%.17g,%zu,%d\n",
                  r.epoch, r.iter, r.train_loss, r.val_loss, r.lr, r.n_pruned,
                  r.n_skipped);
    out << buf;
  }
}

}  // namespace nclosure
