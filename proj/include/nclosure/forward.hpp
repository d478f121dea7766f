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

// Closure-augmented model and its fixed-step RK4 method-of-lines integrator.
//
//   du/dt = base(u) + F_NN(features(u)) + y
//   dy/dt = D_NN(features(u(t)), t) - D_NN(features(u(t - tau)), t - tau)
//   y(t0) = integral over [t0 - tau, t0] of D_NN(features(history(s)), s) ds

#ifndef NCLOSURE_FORWARD_HPP
#define NCLOSURE_FORWARD_HPP

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "nclosure/core.hpp"
#include "nclosure/library.hpp"
#include "nclosure/nets.hpp"

namespace nclosure {

/// A network applied nodewise to the features of a library.
struct NetTerm {
  FeatureLibrary library;
  DenseNet net;

  /// n_states x n_nodes output.
  Field evaluate(const LocalFields& local, double t) const;
};

/// Fixed linear combination `coef * term`, added to the given state.
struct BaseTermSpec {
  int state = 0;
  std::string term;
  double coef = 0.0;
};

/// Builds the known low-fidelity model as a linear, bias-free NetTerm with
/// fixed weights so its partials reuse the closure machinery.
NetTerm make_base_term(int n_states, const std::vector<BaseTermSpec>& terms);

struct ClosureModel {
  int n_states = 1;
  std::optional<NetTerm> base;
  std::optional<NetTerm> markovian;
  std::optional<NetTerm> memory;
  double tau = 0.0;
  /// Smagorinsky eddy-viscosity coefficient; 0 disables. Not differentiated
  /// by the adjoint solver.
  double smagorinsky_cs = 0.0;

  void validate() const;
  int max_order() const;
};

/// Split-form state.
struct AugmentedState {
  Field u;
  Field y;
};

struct ForwardSolution {
  TrajectoryStore u;
  std::optional<TrajectoryStore> y;
  double t0 = 0.0;
  double t_end = 0.0;
  double dt = 0.0;
  std::size_t n_steps = 0;
};

/// Number of panels used for the history quadrature of y(t0).
int history_quadrature_panels(double tau, double dt);

/// y(t0) by composite trapezoid over [t0 - tau, t0].
Field init_y0(const ClosureModel& model, const HistoryFn& history,
              const Grid1D& grid, double t0, double dt);

/// Right-hand side of the split system. `store` supplies u(t - tau); times
/// before `t0` go to the history function.
AugmentedState forward_rhs(double t, const AugmentedState& s,
                           const ClosureModel& model,
                           const TrajectoryStore& store, const Grid1D& grid,
                           double t0);

/// Integrates from t0 to t_end with classical RK4 at fixed step dt,
/// recording every accepted step with its time derivative. With a memory
/// term, dt must not exceed tau and tau must be an integer multiple of dt.
ForwardSolution integrate_forward(const ClosureModel& model,
                                  const Grid1D& grid,
                                  const HistoryFn& history, double t0,
                                  double t_end, double dt);

/// Number of dt steps in `span`; throws unless span is an integer multiple.
std::size_t step_count(double span, double dt, const char* what);

}  // namespace nclosure

#endif  // NCLOSURE_FORWARD_HPP
