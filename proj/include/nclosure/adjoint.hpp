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

// Continuous adjoint of the closure-augmented split system, integrated
// backward in time, and the parameter gradients assembled from it.
//
// Sign convention: the loss enters as a forcing on d(lambda)/dt, so at each
// data time T_i
//
//   lambda(T_i^-) = lambda(T_i^+) - jump_i / h,
//
// where jump_i is the nodal loss sensitivity and division by the node
// spacing turns it into a density. Gradients are then
//
//   dL/dphi   = - int int lambda . dF/dphi
//   dL/dtheta = - int int mu(t) . dD(t)/dtheta + int int mu(t) . dD(t-tau)/dtheta
//               - int mu(t0) . int_{t0-tau}^{t0} dD(history)/dtheta
//
// with spatial integrals h * sum over nodes and trapezoid rules in time.

#ifndef NCLOSURE_ADJOINT_HPP
#define NCLOSURE_ADJOINT_HPP

#include <string>
#include <utility>
#include <vector>

#include "nclosure/core.hpp"
#include "nclosure/forward.hpp"

namespace nclosure {

enum class LossKind { kMse, kMae };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind k);

/// Observations at times T_1 < ... < T_M, each at a list of node indices.
struct DataSet {
  std::vector<double> times;
  std::vector<std::vector<int>> nodes;
  /// targets[i] is n_states x nodes[i].size().
  std::vector<Field> targets;
  LossKind loss = LossKind::kMse;

  std::size_t size() const { return times.size(); }
  void validate(int n_nodes, int n_states) const;

  /// Every node observed at every time.
  static DataSet full_field(std::vector<double> times,
                            const std::vector<Field>& fields, LossKind loss);
};

/// L = (1/M) sum_i (1/N_i) sum_k l(u(x_k, T_i)), l summed over states.
double loss_eval(const TrajectoryStore& traj, const DataSet& data);

/// Nodal sensitivity of the loss to u at data time i:
/// (1 / (M N_i)) dl/du at listed nodes, zero elsewhere. MAE uses
/// subgradient 0 at zero residual.
Field loss_jump(const Field& u_at_ti, const DataSet& data, std::size_t i);

struct AdjointDerivative {
  Field lambda;
  Field mu;
};

/// Time derivatives of (lambda, mu) at t given the forward field u(t).
/// `mu_adv` is mu(t + tau) (zero past the horizon); ignored without a
/// memory closure.
AdjointDerivative adjoint_rhs(double t, const Field& lambda, const Field& mu,
                              const Field& mu_adv, const Field& u,
                              const ClosureModel& model, const Grid1D& grid);

/// Backward solution on the forward step grid. lambda is stored with both
/// one-sided limits at every knot; mu is continuous.
class AdjointStore {
 public:
  AdjointStore(double t0, double dt, std::size_t n_steps, int n_states,
               int n_nodes);

  std::size_t size() const { return times_.size(); }
  double time(std::size_t k) const { return times_[k]; }
  double t0() const { return times_.front(); }
  double t_end() const { return times_.back(); }
  double dt() const { return dt_; }

  /// lambda(t_k^-) and lambda(t_k^+).
  const Field& lambda_left(std::size_t k) const { return lam_minus_[k]; }
  const Field& lambda_right(std::size_t k) const { return lam_plus_[k]; }
  const Field& mu(std::size_t k) const { return mu_[k]; }

  /// Queries return zero for t >= t_end. At knots lambda returns its right
  /// limit. Between knots both use cubic Hermite data from the panel's own
  /// side of any jump.
  Field query_lambda(double t) const;
  Field query_mu(double t) const;
  void query_mu_into(double t, Field& out) const;

  /// First filled knot; knots [first_filled, size) are valid.
  std::size_t first_filled() const { return first_filled_; }

 private:
  friend AdjointStore integrate_adjoint(const ForwardSolution&,
                                        const DataSet&, const ClosureModel&,
                                        const Grid1D&);

  std::size_t locate(double t) const;

  double dt_;
  std::vector<double> times_;
  std::vector<Field> lam_minus_, lam_plus_, dlam_minus_, dlam_plus_;
  std::vector<Field> mu_, dmu_minus_, dmu_plus_;
  std::size_t first_filled_;
};

/// RK4 backward from t_end to t0 with lambda = mu = 0 past t_end, applying
/// the loss jumps at every data time. Data times must lie on the forward
/// step grid.
AdjointStore integrate_adjoint(const ForwardSolution& sol, const DataSet& data,
                               const ClosureModel& model, const Grid1D& grid);

/// dL/dphi for the Markovian network.
std::vector<double> grad_phi(const ForwardSolution& sol,
                             const AdjointStore& adj,
                             const ClosureModel& model, const Grid1D& grid);

/// dL/dtheta for the memory network.
std::vector<double> grad_theta(const ForwardSolution& sol,
                               const AdjointStore& adj,
                               const ClosureModel& model,
                               const HistoryFn& history, const Grid1D& grid);

struct LossAndGradients {
  double loss = 0.0;
  std::vector<double> phi;
  std::vector<double> theta;
};

/// Forward solve, loss, adjoint solve and both gradients for one sequence.
/// Gradients are raw (no constraint folding or regularization).
LossAndGradients loss_and_gradients(const ClosureModel& model,
                                    const Grid1D& grid,
                                    const HistoryFn& history, double t0,
                                    double t_end, double dt,
                                    const DataSet& data);

}  // namespace nclosure

#endif  // NCLOSURE_ADJOINT_HPP
