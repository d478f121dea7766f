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

#include "nclosure/forward.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "nclosure/baseline.hpp"
#include "nclosure/error.hpp"

namespace nclosure {

Field NetTerm::evaluate(const LocalFields& local, double t) const {
  const Eigen::MatrixXd out = net.forward(library.eval(local, t));
  return out.array();
}

NetTerm make_base_term(int n_states, const std::vector<BaseTermSpec>& terms) {
  if (terms.empty()) throw InvalidArgument("base model has no terms");
  std::vector<Term> lib_terms;
  for (const BaseTermSpec& b : terms) {
    if (b.state < 0 || b.state >= n_states) {
      throw InvalidArgument("base term state out of range");
    }
    const Term t = parse_term(b.term);
    if (std::find(lib_terms.begin(), lib_terms.end(), t) == lib_terms.end()) {
      lib_terms.push_back(t);
    }
  }
  FeatureLibrary lib(lib_terms);
  DenseNet net(lib.size(), {{n_states, Activation::kLinear}});
  auto w = net.weights(0);
  for (const BaseTermSpec& b : terms) {
    w(b.state, lib.find(parse_term(b.term))) += b.coef;
  }
  return NetTerm{std::move(lib), std::move(net)};
}

void ClosureModel::validate() const {
  if (n_states < 1) throw InvalidArgument("model needs at least one state");
  auto check = [&](const std::optional<NetTerm>& term, const char* name) {
    if (!term) return;
    if (term->library.size() != term->net.n_in()) {
      throw InvalidArgument(std::string(name) +
                            ": library size does not match network input");
    }
    if (term->net.n_out() != n_states) {
      throw InvalidArgument(std::string(name) +
                            ": network output width must equal state count");
    }
    if (term->library.max_state() >= n_states) {
      throw InvalidArgument(std::string(name) +
                            ": library reads a state the model lacks");
    }
  };
  check(base, "base model");
  check(markovian, "markovian closure");
  check(memory, "memory closure");
  if (memory && !(tau > 0.0)) {
    throw InvalidArgument("memory closure needs tau > 0");
  }
  if (smagorinsky_cs < 0.0) {
    throw InvalidArgument("smagorinsky coefficient must be >= 0");
  }
}

int ClosureModel::max_order() const {
  int m = smagorinsky_cs > 0.0 ? 1 : 0;
  for (const auto* t : {&base, &markovian, &memory}) {
    if (*t) m = std::max(m, (*t)->library.max_order());
  }
  return m;
}

std::size_t step_count(double span, double dt, const char* what) {
  if (!(dt > 0.0)) throw InvalidArgument("time step must be positive");
  if (span < 0.0) throw InvalidArgument(std::string(what) + ": negative span");
  const double ratio = span / dt;
  const double n = std::round(ratio);
  if (std::abs(ratio - n) > 1e-9 * std::max(1.0, n)) {
    std::ostringstream msg;
    msg << what << ": " << span << " is not a multiple of dt = " << dt;
    throw InvalidArgument(msg.str());
  }
  return static_cast<std::size_t>(n);
}

int history_quadrature_panels(double tau, double dt) {
  return std::max(8, static_cast<int>(std::ceil(tau / dt - 1e-9)));
}

namespace {

void zero_dirichlet_ends(const Grid1D& grid, Field& f) {
  if (grid.periodic()) return;
  f.col(0).setZero();
  f.col(f.cols() - 1).setZero();
}

Field memory_term(const ClosureModel& model, const Field& u,
                  const Grid1D& grid, double t) {
  const LocalFields lf =
      compute_local_fields(u, grid, model.memory->library.max_order());
  return model.memory->evaluate(lf, t);
}

}  // namespace

Field init_y0(const ClosureModel& model, const HistoryFn& history,
              const Grid1D& grid, double t0, double dt) {
  if (!model.memory) throw InvalidArgument("init_y0 needs a memory closure");
  const int m = history_quadrature_panels(model.tau, dt);
  const double w = model.tau / m;
  Field y = Field::Zero(model.n_states, grid.n_nodes);
  Field h;
  for (int q = 0; q <= m; ++q) {
    const double s = t0 - model.tau + q * w;
    history.eval_into(q == m ? t0 : s, h);
    const double weight = (q == 0 || q == m) ? 0.5 * w : w;
    y += weight * memory_term(model, h, grid, q == m ? t0 : s);
  }
  zero_dirichlet_ends(grid, y);
  return y;
}

AugmentedState forward_rhs(double t, const AugmentedState& s,
                           const ClosureModel& model,
                           const TrajectoryStore& store, const Grid1D& grid,
                           double t0) {
  AugmentedState d;
  const LocalFields lf = compute_local_fields(s.u, grid, model.max_order());
  d.u = Field::Zero(model.n_states, grid.n_nodes);
  if (model.base) d.u += model.base->evaluate(lf, t);
  if (model.markovian) d.u += model.markovian->evaluate(lf, t);
  if (model.smagorinsky_cs > 0.0) {
    d.u += smagorinsky_closure(s.u, grid, model.smagorinsky_cs);
  }
  if (model.memory) {
    d.u += s.y;
    const double td = t - model.tau;
    Field delayed;
    if (store.empty() || td < t0) {
      store.history().eval_into(td, delayed);
    } else {
      store.query_into(td, delayed);
    }
    d.y = model.memory->evaluate(lf, t) - memory_term(model, delayed, grid, td);
    zero_dirichlet_ends(grid, d.y);
  } else {
    d.y = Field::Zero(s.y.rows(), s.y.cols());
  }
  zero_dirichlet_ends(grid, d.u);
  return d;
}

ForwardSolution integrate_forward(const ClosureModel& model,
                                  const Grid1D& grid,
                                  const HistoryFn& history, double t0,
                                  double t_end, double dt) {
  model.validate();
  const std::size_t n_steps = step_count(t_end - t0, dt, "integration span");
  if (model.memory) {
    if (dt > model.tau * (1.0 + 1e-12)) {
      throw InvalidArgument("time step must not exceed the delay");
    }
    step_count(model.tau, dt, "delay");
  }
  if (history.n_states() != model.n_states ||
      history.n_nodes() != grid.n_nodes) {
    throw InvalidArgument("history field shape does not match model/grid");
  }

  ForwardSolution sol{TrajectoryStore(history, model.tau), std::nullopt, t0,
                      t_end, dt, n_steps};
  if (model.memory) {
    sol.y.emplace(HistoryFn::constant(Field::Zero(model.n_states, grid.n_nodes)),
                  0.0);
  }

  AugmentedState s;
  s.u = history(t0);
  zero_dirichlet_ends(grid, s.u);
  s.y = model.memory ? init_y0(model, history, grid, t0, dt)
                     : Field::Zero(model.n_states, grid.n_nodes);
  require_finite(s.u, t0, "initial field");
  require_finite(s.y, t0, "initial memory state");

  AugmentedState k1 = forward_rhs(t0, s, model, sol.u, grid, t0);
  sol.u.append(t0, s.u, k1.u);
  if (sol.y) sol.y->append(t0, s.y, k1.y);

  AugmentedState stage;
  for (std::size_t k = 0; k < n_steps; ++k) {
    const double t = t0 + static_cast<double>(k) * dt;
    const double t_next = t0 + static_cast<double>(k + 1) * dt;
    const double half = 0.5 * dt;

    stage.u = s.u + half * k1.u;
    stage.y = s.y + half * k1.y;
    const AugmentedState k2 =
        forward_rhs(t + half, stage, model, sol.u, grid, t0);
    stage.u = s.u + half * k2.u;
    stage.y = s.y + half * k2.y;
    const AugmentedState k3 =
        forward_rhs(t + half, stage, model, sol.u, grid, t0);
    stage.u = s.u + dt * k3.u;
    stage.y = s.y + dt * k3.y;
    const AugmentedState k4 = forward_rhs(t_next, stage, model, sol.u, grid, t0);

    s.u += (dt / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    s.y += (dt / 6.0) * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    require_finite(s.u, t_next, "forward solve");
    require_finite(s.y, t_next, "forward solve (memory state)");

    k1 = forward_rhs(t_next, s, model, sol.u, grid, t0);
    require_finite(k1.u, t_next, "forward right-hand side");
    sol.u.append(t_next, s.u, k1.u);
    if (sol.y) sol.y->append(t_next, s.y, k1.y);
  }
  return sol;
}

}  // namespace nclosure
