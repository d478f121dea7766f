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

#include "nclosure/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nclosure/error.hpp"

namespace nclosure {

BoundaryKind parse_boundary_kind(const std::string& name) {
  if (name == "periodic") return BoundaryKind::kPeriodic;
  if (name == "dirichlet" || name == "dirichlet_homogeneous") {
    return BoundaryKind::kDirichletHomogeneous;
  }
  throw InvalidArgument("unknown boundary kind '" + name + "'");
}

std::string to_string(BoundaryKind bc) {
  return bc == BoundaryKind::kPeriodic ? "periodic" : "dirichlet";
}

Eigen::ArrayXd Grid1D::nodes() const {
  Eigen::ArrayXd x(n_nodes);
  for (int i = 0; i < n_nodes; ++i) x[i] = this->x(i);
  return x;
}

Grid1D make_grid(double x_min, double x_max, int n, BoundaryKind bc) {
  if (!(std::isfinite(x_min) && std::isfinite(x_max)) || !(x_max > x_min)) {
    throw InvalidArgument("grid interval must satisfy x_max > x_min");
  }
  if (n < kMinNodes) {
    throw InvalidArgument("grid needs at least 5 nodes, got " +
                          std::to_string(n));
  }
  Grid1D g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n_nodes = n;
  g.bc = bc;
  g.h = bc == BoundaryKind::kPeriodic ? (x_max - x_min) / n
                                      : (x_max - x_min) / (n - 1);
  return g;
}

void require_finite(const Field& f, double t, const char* what) {
  if (!f.allFinite()) {
    std::ostringstream msg;
    msg << what << ": nonfinite value at t = " << std::setprecision(17) << t;
    throw BlowUp(t, msg.str());
  }
}

// ---------------------------------------------------------------------------
// HistoryFn

HistoryFn HistoryFn::constant(Field initial) {
  HistoryFn h;
  h.kind_ = Kind::kConstant;
  h.times_ = {0.0};
  h.fields_.push_back(std::move(initial));
  return h;
}

HistoryFn HistoryFn::data_interpolant(std::vector<double> times,
                                      std::vector<Field> fields) {
  if (times.empty() || times.size() != fields.size()) {
    throw InvalidArgument("data interpolant needs matching, nonempty times "
                          "and fields");
  }
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) {
      throw InvalidArgument("data interpolant times must be increasing");
    }
    if (fields[i].rows() != fields[0].rows() ||
        fields[i].cols() != fields[0].cols()) {
      throw InvalidArgument("data interpolant fields differ in shape");
    }
  }
  HistoryFn h;
  h.kind_ = Kind::kDataInterpolant;
  h.times_ = std::move(times);
  h.fields_ = std::move(fields);
  return h;
}

Field HistoryFn::operator()(double t) const {
  Field out;
  eval_into(t, out);
  return out;
}

void HistoryFn::eval_into(double t, Field& out) const {
  if (kind_ == Kind::kConstant || t <= times_.front()) {
    out = fields_.front();
    return;
  }
  if (t >= times_.back()) {
    out = fields_.back();
    return;
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[k] == t) {
    out = fields_[k];
    return;
  }
  const double s = (t - times_[k]) / (times_[k + 1] - times_[k]);
  out = (1.0 - s) * fields_[k] + s * fields_[k + 1];
}

// ---------------------------------------------------------------------------
// TrajectoryStore

double time_tolerance(double scale) {
  return 64.0 * std::numeric_limits<double>::epsilon() *
         (1.0 + std::abs(scale));
}

void hermite_into(double t0, double dt, double t, const Field& p0,
                  const Field& m0, const Field& p1, const Field& m1,
                  Field& out) {
  const double s = (t - t0) / dt;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  out = h00 * p0 + (h10 * dt) * m0 + h01 * p1 + (h11 * dt) * m1;
}

TrajectoryStore::TrajectoryStore(HistoryFn history, double tau)
    : history_(std::move(history)), tau_(tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("delay must be nonnegative");
}

double TrajectoryStore::t_first() const {
  if (times_.empty()) throw OutOfRange("trajectory store is empty");
  return times_.front();
}

double TrajectoryStore::t_last() const {
  if (times_.empty()) throw OutOfRange("trajectory store is empty");
  return times_.back();
}

void TrajectoryStore::append(double t, Field u, Field du) {
  if (!times_.empty() && !(t > times_.back())) {
    throw InvalidArgument("trajectory knots must be strictly increasing");
  }
  if (!values_.empty() && (u.rows() != values_.front().rows() ||
                           u.cols() != values_.front().cols())) {
    throw InvalidArgument("trajectory field shape changed");
  }
  if (u.rows() != du.rows() || u.cols() != du.cols()) {
    throw InvalidArgument("field and derivative shapes differ");
  }
  times_.push_back(t);
  values_.push_back(std::move(u));
  derivs_.push_back(std::move(du));
}

Field TrajectoryStore::query(double t) const {
  Field out;
  query_into(t, out);
  return out;
}

void TrajectoryStore::query_into(double t, Field& out) const {
  if (times_.empty()) throw OutOfRange("query on empty trajectory store");
  const double t0 = times_.front();
  const double t_end = times_.back();
  const double tol = time_tolerance(std::max(std::abs(t0), std::abs(t_end)) +
                                    tau_);
  if (t < t0 - tau_ - tol || t > t_end + tol) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "trajectory query at t = " << t
        << " outside [" << t0 - tau_ << ", " << t_end << "]";
    throw OutOfRange(msg.str());
  }
  if (t < t0) {
    history_.eval_into(t, out);
    return;
  }
  if (t >= t_end) {
    out = values_.back();
    return;
  }
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[k] == t) {
    out = values_[k];
    return;
  }
  hermite_into(times_[k], times_[k + 1] - times_[k], t, values_[k],
               derivs_[k], values_[k + 1], derivs_[k + 1], out);
}

// ---------------------------------------------------------------------------
// CSV

void write_field_csv(std::ostream& os, const Grid1D& grid,
                     const SnapshotSeries& series) {
  if (series.empty()) {
    os << "t,x,state_0\n";
    return;
  }
  const Eigen::Index n_states = series.fields.front().rows();
  os << "t,x";
  for (Eigen::Index s = 0; s < n_states; ++s) os << ",state_" << s;
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Field& f = series.fields[k];
    if (f.cols() != grid.n_nodes || f.rows() != n_states) {
      throw InvalidArgument("snapshot shape does not match grid");
    }
    for (int i = 0; i < grid.n_nodes; ++i) {
      put(series.times[k]);
      os << ',';
      put(grid.x(i));
      for (Eigen::Index s = 0; s < n_states; ++s) {
        os << ',';
        put(f(s, i));
      }
      os << '\n';
    }
  }
}

void write_field_csv(const std::string& path, const Grid1D& grid,
                     const SnapshotSeries& series) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_field_csv(os, grid, series);
  if (!os) throw IoError("failed writing '" + path + "'");
}

SnapshotSeries read_field_csv(std::istream& is, int n_nodes) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("field CSV is empty");
  if (line.rfind("t,x", 0) != 0) throw IoError("field CSV header must start "
                                               "with 't,x'");
  const auto n_states = static_cast<Eigen::Index>(
      std::count(line.begin(), line.end(), ',') - 1);
  if (n_states < 1) throw IoError("field CSV has no state columns");

  SnapshotSeries series;
  std::vector<double> row(static_cast<std::size_t>(n_states) + 2);
  int node = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      if (c >= row.size()) throw IoError("field CSV row has too many columns");
      row[c++] = std::strtod(cell.c_str(), nullptr);
    }
    if (c != row.size()) throw IoError("field CSV row has too few columns");
    if (node == 0) {
      series.times.push_back(row[0]);
      series.fields.emplace_back(n_states, n_nodes);
    } else if (row[0] != series.times.back()) {
      throw IoError("field CSV snapshot has fewer rows than grid nodes");
    }
    for (Eigen::Index s = 0; s < n_states; ++s) {
      series.fields.back()(s, node) = row[static_cast<std::size_t>(s) + 2];
    }
    node = (node + 1) % n_nodes;
  }
  if (node != 0) throw IoError("field CSV ends mid-snapshot");
  return series;
}

SnapshotSeries read_field_csv(const std::string& path, int n_nodes) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  return read_field_csv(is, n_nodes);
}

}  // namespace nclosure
