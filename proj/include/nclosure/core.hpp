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

// Grids, fields, history functions and dense-output trajectory storage shared
// by the forward and adjoint solvers.

#ifndef NCLOSURE_CORE_HPP
#define NCLOSURE_CORE_HPP

#include <Eigen/Core>

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace nclosure {

/// Node values of every state variable: one row per state, one column per
/// node. Row-major so each state's nodes are contiguous.
using Field =
    Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class BoundaryKind { kPeriodic, kDirichletHomogeneous };

BoundaryKind parse_boundary_kind(const std::string& name);
std::string to_string(BoundaryKind bc);

/// Uniform 1D grid. For periodic grids the node at x_max is the image of
/// node 0 and is not stored; Dirichlet grids store both end nodes.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_nodes = 0;
  BoundaryKind bc = BoundaryKind::kPeriodic;
  double h = 0.0;

  bool periodic() const { return bc == BoundaryKind::kPeriodic; }
  double x(int i) const { return x_min + h * i; }
  double length() const { return x_max - x_min; }
  Eigen::ArrayXd nodes() const;
};

/// Smallest node count supported; the third-derivative stencil spans five
/// nodes.
inline constexpr int kMinNodes = 5;

Grid1D make_grid(double x_min, double x_max, int n, BoundaryKind bc);

/// Throws if any entry is NaN or infinite.
void require_finite(const Field& f, double t, const char* what);

/// Prescribed solution on [t0 - tau, t0].
class HistoryFn {
 public:
  enum class Kind { kConstant, kDataInterpolant };

  /// Constant extension of the initial field backwards in time.
  static HistoryFn constant(Field initial);

  /// Piecewise-linear interpolant through data snapshots; constant beyond
  /// the first and last snapshot.
  static HistoryFn data_interpolant(std::vector<double> times,
                                    std::vector<Field> fields);

  Kind kind() const { return kind_; }
  Field operator()(double t) const;
  void eval_into(double t, Field& out) const;
  Eigen::Index n_states() const { return fields_.front().rows(); }
  Eigen::Index n_nodes() const { return fields_.front().cols(); }

 private:
  HistoryFn() = default;

  Kind kind_ = Kind::kConstant;
  std::vector<double> times_;
  std::vector<Field> fields_;
};

/// Time-ordered record of accepted solver steps, each with its field and
/// time derivative. Queries between knots use cubic Hermite interpolation;
/// queries before the first knot go to the history function.
class TrajectoryStore {
 public:
  TrajectoryStore(HistoryFn history, double tau);

  /// `t` must be strictly greater than the last stored knot time.
  void append(double t, Field u, Field du);

  Field query(double t) const;
  void query_into(double t, Field& out) const;

  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }
  double tau() const { return tau_; }
  double t_first() const;
  double t_last() const;
  double time(std::size_t k) const { return times_[k]; }
  const Field& value(std::size_t k) const { return values_[k]; }
  const Field& derivative(std::size_t k) const { return derivs_[k]; }
  const HistoryFn& history() const { return history_; }

 private:
  HistoryFn history_;
  double tau_;
  std::vector<double> times_;
  std::vector<Field> values_;
  std::vector<Field> derivs_;
};

/// Cubic Hermite basis on [t0, t0 + dt] evaluated at `t`, written into out.
void hermite_into(double t0, double dt, double t, const Field& p0,
                  const Field& m0, const Field& p1, const Field& m1,
                  Field& out);

/// Slack allowed when comparing solver times that were formed by different
/// arithmetic paths (t0 + k*dt versus t + c*dt - tau).
double time_tolerance(double scale);

/// A sequence of field snapshots on one grid.
struct SnapshotSeries {
  std::vector<double> times;
  std::vector<Field> fields;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// CSV with header `t,x,state_0,...,state_{Ns-1}`: one row per node,
/// row-major in x, snapshots in time order.
void write_field_csv(std::ostream& os, const Grid1D& grid,
                     const SnapshotSeries& series);
void write_field_csv(const std::string& path, const Grid1D& grid,
                     const SnapshotSeries& series);
SnapshotSeries read_field_csv(std::istream& is, int n_nodes);
SnapshotSeries read_field_csv(const std::string& path, int n_nodes);

}  // namespace nclosure

#endif  // NCLOSURE_CORE_HPP
