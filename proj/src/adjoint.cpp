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

#include "nclosure/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <span>

#include "nclosure/error.hpp"
#include "nclosure/stencil.hpp"

namespace nclosure {

LossKind parse_loss_kind(const std::string& name) {
  if (name == "mse" || name == "MSE") return LossKind::kMse;
  if (name == "mae" || name == "MAE") return LossKind::kMae;
  throw InvalidArgument("unknown loss kind '" + name + "'");
}

std::string to_string(LossKind k) { return k == LossKind::kMse ? "mse" : "mae"; }

// ---------------------------------------------------------------------------
// Data and loss

void DataSet::validate(int n_nodes, int n_states) const {
  if (nodes.size() != times.size() || targets.size() != times.size()) {
    throw InvalidArgument("data set arrays differ in length");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw InvalidArgument("data times must be strictly increasing");
    }
    if (nodes[i].empty()) throw InvalidArgument("data time has no nodes");
    for (int k : nodes[i]) {
      if (k < 0 || k >= n_nodes) {
        throw InvalidArgument("data node index out of range");
      }
    }
    if (targets[i].rows() != n_states ||
        targets[i].cols() != static_cast<Eigen::Index>(nodes[i].size())) {
      throw InvalidArgument("data target shape mismatch");
    }
  }
}

DataSet DataSet::full_field(std::vector<double> times,
                            const std::vector<Field>& fields, LossKind loss) {
  DataSet d;
  d.loss = loss;
  d.times = std::move(times);
  for (const Field& f : fields) {
    std::vector<int> idx(static_cast<std::size_t>(f.cols()));
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    d.nodes.push_back(std::move(idx));
    d.targets.push_back(f);
  }
  return d;
}

double loss_eval(const TrajectoryStore& traj, const DataSet& data) {
  if (data.size() == 0) return 0.0;
  const double M = static_cast<double>(data.size());
  double total = 0.0;
  Field u;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.times[i] > traj.t_last() + time_tolerance(traj.t_last()) ||
        data.times[i] < traj.t_first() - time_tolerance(traj.t_first())) {
      throw OutOfRange("data time outside the trajectory");
    }
    traj.query_into(data.times[i], u);
    double sum = 0.0;
    const auto& nodes = data.nodes[i];
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      for (Eigen::Index s = 0; s < u.rows(); ++s) {
        const double r = u(s, nodes[k]) - data.targets[i](s, static_cast<Eigen::Index>(k));
        sum += data.loss == LossKind::kMse ? r * r : std::abs(r);
      }
    }
    total += sum / static_cast<double>(nodes.size());
  }
  return total / M;
}

Field loss_jump(const Field& u, const DataSet& data, std::size_t i) {
  Field jump = Field::Zero(u.rows(), u.cols());
  const double scale = 1.0 / (static_cast<double>(data.size()) *
                              static_cast<double>(data.nodes[i].size()));
  const auto& nodes = data.nodes[i];
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    for (Eigen::Index s = 0; s < u.rows(); ++s) {
      const double r = u(s, nodes[k]) - data.targets[i](s, static_cast<Eigen::Index>(k));
      const double dl = data.loss == LossKind::kMse
                            ? 2.0 * r
                            : (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0));
      jump(s, nodes[k]) += scale * dl;
    }
  }
  return jump;
}

// ---------------------------------------------------------------------------
// Adjoint right-hand side

namespace {

void zero_ends(const Grid1D& grid, Field& f) {
  if (grid.periodic()) return;
  f.col(0).setZero();
  f.col(f.cols() - 1).setZero();
}

/// Adds the per-slot contractions of cotangent `cot` through `term` at the
/// local fields into `acc`.
void accumulate_slots(const NetTerm& term, const LocalFields& lf, double t,
                      const Field& cot, int n_states,
                      std::array<Field, kSlots>& acc) {
  const Eigen::MatrixXd x = term.library.eval(lf, t);
  const Eigen::MatrixXd c = cot.matrix();
  const Eigen::MatrixXd feat_cot = term.net.vjp_input(x, c);
  const FeaturePartials p = term.library.partials(lf);
  const auto a = term.library.contract(p, feat_cot, n_states);
  for (int k = 0; k < kSlots; ++k) acc[k] += a[k];
}

}  // namespace

AdjointDerivative adjoint_rhs(double t, const Field& lambda, const Field& mu,
                              const Field& mu_adv, const Field& u,
                              const ClosureModel& model, const Grid1D& grid) {
  if (model.smagorinsky_cs > 0.0) {
    throw InvalidArgument("adjoint solve does not support the Smagorinsky "
                          "term");
  }
  const int ns = model.n_states;
  const LocalFields lf = compute_local_fields(u, grid, model.max_order());
  std::array<Field, kSlots> acc;
  for (auto& a : acc) a = Field::Zero(ns, grid.n_nodes);

  if (model.base) accumulate_slots(*model.base, lf, t, lambda, ns, acc);
  if (model.markovian) {
    accumulate_slots(*model.markovian, lf, t, lambda, ns, acc);
  }
  if (model.memory) {
    const Field w = mu - mu_adv;
    accumulate_slots(*model.memory, lf, t, w, ns, acc);
  }

  AdjointDerivative d;
  d.lambda = -acc[0];
  const auto n = static_cast<std::size_t>(grid.n_nodes);
  Eigen::ArrayXd div(grid.n_nodes);
  for (int k = 1; k < kSlots; ++k) {
    if (k > model.max_order()) break;
    const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // -(-1)^k
    for (int s = 0; s < ns; ++s) {
      adjoint_divergence(std::span<const double>(acc[k].row(s).data(), n), k,
                         grid, std::span<double>(div.data(), n));
      d.lambda.row(s) += sign * div.transpose();
    }
  }
  zero_ends(grid, d.lambda);
  d.mu = -lambda;
  return d;
}

// ---------------------------------------------------------------------------
// AdjointStore

AdjointStore::AdjointStore(double t0, double dt, std::size_t n_steps,
                           int n_states, int n_nodes)
    : dt_(dt), first_filled_(n_steps + 1) {
  times_.resize(n_steps + 1);
  for (std::size_t k = 0; k <= n_steps; ++k) {
    times_[k] = t0 + static_cast<double>(k) * dt;
  }
  const Field z = Field::Zero(n_states, n_nodes);
  for (auto* v : {&lam_minus_, &lam_plus_, &dlam_minus_, &dlam_plus_, &mu_,
                  &dmu_minus_, &dmu_plus_}) {
    v->assign(n_steps + 1, z);
  }
}

std::size_t AdjointStore::locate(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  return static_cast<std::size_t>(it - times_.begin()) - 1;
}

Field AdjointStore::query_lambda(double t) const {
  if (t >= times_.back()) return Field::Zero(mu_[0].rows(), mu_[0].cols());
  if (t < times_.front()) throw OutOfRange("adjoint query before t0");
  const std::size_t k = locate(t);
  if (k < first_filled_) throw OutOfRange("adjoint query in unfilled region");
  if (times_[k] == t) return lam_plus_[k];
  Field out;
  hermite_into(times_[k], times_[k + 1] - times_[k], t, lam_plus_[k],
               dlam_plus_[k], lam_minus_[k + 1], dlam_minus_[k + 1], out);
  return out;
}

void AdjointStore::query_mu_into(double t, Field& out) const {
  if (t >= times_.back()) {
    out = Field::Zero(mu_[0].rows(), mu_[0].cols());
    return;
  }
  if (t < times_.front()) throw OutOfRange("adjoint query before t0");
  const std::size_t k = locate(t);
  if (times_[k] == t) {
    if (k < first_filled_) throw OutOfRange("adjoint query in unfilled region");
    out = mu_[k];
    return;
  }
  if (k + 1 < first_filled_ ||
      (k < first_filled_ && t < times_[k + 1] - time_tolerance(times_[k + 1]))) {
    throw OutOfRange("adjoint query in unfilled region");
  }
  if (k < first_filled_) {
    out = mu_[k + 1];
    return;
  }
  hermite_into(times_[k], times_[k + 1] - times_[k], t, mu_[k], dmu_plus_[k],
               mu_[k + 1], dmu_minus_[k + 1], out);
}

Field AdjointStore::query_mu(double t) const {
  Field out;
  query_mu_into(t, out);
  return out;
}

// ---------------------------------------------------------------------------
// Backward integration

AdjointStore integrate_adjoint(const ForwardSolution& sol, const DataSet& data,
                               const ClosureModel& model, const Grid1D& grid) {
  const int ns = model.n_states;
  data.validate(grid.n_nodes, ns);
  const std::size_t n = sol.n_steps;
  const double dt = sol.dt;
  const double t0 = sol.t0;
  AdjointStore adj(t0, dt, n, ns, grid.n_nodes);

  std::map<std::size_t, Field> jumps;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.times[i] < t0 - time_tolerance(t0) ||
        data.times[i] > sol.t_end + time_tolerance(sol.t_end)) {
      throw InvalidArgument("data time outside the adjoint horizon");
    }
    const std::size_t k = step_count(data.times[i] - t0, dt,
                                     "data time offset (misaligned data)");
    Field j = loss_jump(sol.u.value(k), data, i) / grid.h;
    zero_ends(grid, j);
    auto [it, fresh] = jumps.emplace(k, j);
    if (!fresh) it->second += j;
  }

  const bool has_memory = model.memory.has_value();
  Field mu_adv;
  const Field zero = Field::Zero(ns, grid.n_nodes);
  auto rhs = [&](double t, const Field& lam, const Field& mu,
                 const Field& u) -> AdjointDerivative {
    if (has_memory) {
      adj.query_mu_into(t + model.tau, mu_adv);
    }
    return adjoint_rhs(t, lam, mu, has_memory ? mu_adv : zero, u, model,
                       grid);
  };

  auto finish_knot = [&](std::size_t k) {
    const double t = adj.times_[k];
    const Field& u = sol.u.value(k);
    AdjointDerivative d = rhs(t, adj.lam_plus_[k], adj.mu_[k], u);
    adj.dlam_plus_[k] = d.lambda;
    adj.dmu_plus_[k] = d.mu;
    if (auto it = jumps.find(k); it != jumps.end()) {
      adj.lam_minus_[k] = adj.lam_plus_[k] - it->second;
      d = rhs(t, adj.lam_minus_[k], adj.mu_[k], u);
    } else {
      adj.lam_minus_[k] = adj.lam_plus_[k];
    }
    adj.dlam_minus_[k] = std::move(d.lambda);
    adj.dmu_minus_[k] = std::move(d.mu);
    require_finite(adj.lam_minus_[k], t, "adjoint solve");
    require_finite(adj.mu_[k], t, "adjoint solve");
    adj.first_filled_ = k;
  };

  adj.lam_plus_[n] = zero;
  adj.mu_[n] = zero;
  finish_knot(n);

  Field u_mid;
  Field lam_s, mu_s;
  for (std::size_t k = n; k-- > 0;) {
    const double t_hi = adj.times_[k + 1];
    const double t_lo = adj.times_[k];
    const double half = 0.5 * dt;
    const Field& lam = adj.lam_minus_[k + 1];
    const Field& mu = adj.mu_[k + 1];

    const Field& k1l = adj.dlam_minus_[k + 1];
    const Field& k1m = adj.dmu_minus_[k + 1];
    sol.u.query_into(t_hi - half, u_mid);
    lam_s = lam - half * k1l;
    mu_s = mu - half * k1m;
    const AdjointDerivative k2 = rhs(t_hi - half, lam_s, mu_s, u_mid);
    lam_s = lam - half * k2.lambda;
    mu_s = mu - half * k2.mu;
    const AdjointDerivative k3 = rhs(t_hi - half, lam_s, mu_s, u_mid);
    lam_s = lam - dt * k3.lambda;
    mu_s = mu - dt * k3.mu;
    const AdjointDerivative k4 = rhs(t_lo, lam_s, mu_s, sol.u.value(k));

    adj.lam_plus_[k] =
        lam - (dt / 6.0) * (k1l + 2.0 * k2.lambda + 2.0 * k3.lambda + k4.lambda);
    adj.mu_[k] = mu - (dt / 6.0) * (k1m + 2.0 * k2.mu + 2.0 * k3.mu + k4.mu);
    finish_knot(k);
  }
  return adj;
}

// ---------------------------------------------------------------------------
// Gradients

std::vector<double> grad_phi(const ForwardSolution& sol,
                             const AdjointStore& adj,
                             const ClosureModel& model, const Grid1D& grid) {
  if (!model.markovian) throw InvalidArgument("model has no Markovian closure");
  const NetTerm& term = *model.markovian;
  std::vector<double> grad(term.net.param_count(), 0.0);
  const std::size_t n = sol.n_steps;
  const double half = 0.5 * sol.dt;
  for (std::size_t k = 0; k <= n; ++k) {
    // Left panel ends at t_k^- and right panel starts at t_k^+.
    Field cot = Field::Zero(model.n_states, grid.n_nodes);
    if (k > 0) cot += half * adj.lambda_left(k);
    if (k < n) cot += half * adj.lambda_right(k);
    if ((cot == 0.0).all()) continue;
    cot *= -grid.h;
    const LocalFields lf = compute_local_fields(
        sol.u.value(k), grid, term.library.max_order());
    term.net.vjp(term.library.eval(lf, sol.u.time(k)), cot.matrix(), nullptr,
                 grad);
  }
  return grad;
}

std::vector<double> grad_theta(const ForwardSolution& sol,
                               const AdjointStore& adj,
                               const ClosureModel& model,
                               const HistoryFn& history, const Grid1D& grid) {
  if (!model.memory) throw InvalidArgument("model has no memory closure");
  const NetTerm& term = *model.memory;
  const int order = term.library.max_order();
  std::vector<double> grad(term.net.param_count(), 0.0);
  const std::size_t n = sol.n_steps;
  const double dt = sol.dt;
  const double t0 = sol.t0;

  auto add = [&](const Field& u, double t, const Field& cot) {
    const LocalFields lf = compute_local_fields(u, grid, order);
    term.net.vjp(term.library.eval(lf, t), cot.matrix(), nullptr, grad);
  };

  Field delayed;
  for (std::size_t k = 0; k <= n; ++k) {
    const Field& mu = adj.mu(k);
    if ((mu == 0.0).all()) continue;
    const double w = (k == 0 || k == n) ? 0.5 * dt : dt;
    const Field cot = (w * grid.h) * mu;
    const double t = sol.u.time(k);
    add(sol.u.value(k), t, -cot);
    const double td = t - model.tau;
    if (td < t0) {
      history.eval_into(td, delayed);
    } else {
      sol.u.query_into(td, delayed);
    }
    add(delayed, td, cot);
  }

  // History quadrature of y(t0), same rule as init_y0.
  const Field& mu0 = adj.mu(0);
  if (!(mu0 == 0.0).all()) {
    const int m = history_quadrature_panels(model.tau, dt);
    const double wq = model.tau / m;
    Field h;
    for (int q = 0; q <= m; ++q) {
      const double s = q == m ? t0 : t0 - model.tau + q * wq;
      history.eval_into(s, h);
      const double weight = (q == 0 || q == m) ? 0.5 * wq : wq;
      add(h, s, -(weight * grid.h) * mu0);
    }
  }
  return grad;
}

LossAndGradients loss_and_gradients(const ClosureModel& model,
                                    const Grid1D& grid,
                                    const HistoryFn& history, double t0,
                                    double t_end, double dt,
                                    const DataSet& data) {
  const ForwardSolution sol =
      integrate_forward(model, grid, history, t0, t_end, dt);
  LossAndGradients out;
  out.loss = loss_eval(sol.u, data);
  const AdjointStore adj = integrate_adjoint(sol, data, model, grid);
  if (model.markovian) out.phi = grad_phi(sol, adj, model, grid);
  if (model.memory) out.theta = grad_theta(sol, adj, model, history, grid);
  return out;
}

}  // namespace nclosure
