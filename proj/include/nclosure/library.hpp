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

// Candidate-term function libraries: map local state data to network input
// features, with closed-form partials with respect to u and its spatial
// derivatives.

#ifndef NCLOSURE_LIBRARY_HPP
#define NCLOSURE_LIBRARY_HPP

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

#include "nclosure/core.hpp"

namespace nclosure {

enum class TermKind { kU, kU2, kUx, kUUx, kUxx, kUxxx, kUUxx, kX, kT, kOne };

/// One library entry. `state` selects the state variable for terms that
/// read u; written `name@state` in configs (`@0` may be omitted).
struct Term {
  TermKind kind = TermKind::kU;
  int state = 0;

  std::string name() const;
  /// Highest spatial derivative order this term reads.
  int order() const;
  bool reads_state() const;
  bool operator==(const Term&) const = default;
};

Term parse_term(const std::string& text);

/// Number of partial slots: u, u_x, u_xx, u_xxx.
inline constexpr int kSlots = 4;

/// Node values of u and its first three derivatives, per state.
struct LocalFields {
  std::array<Field, kSlots> d;
  Eigen::ArrayXd x;
};

LocalFields compute_local_fields(const Field& u, const Grid1D& grid,
                                 int max_order = 3);

/// Partials of every feature, slot by slot: slot[k](j, i) is
/// d feature_j / d (d^k u_{state_j}) at node i.
struct FeaturePartials {
  std::array<Eigen::MatrixXd, kSlots> slot;
};

class FeatureLibrary {
 public:
  FeatureLibrary() = default;
  explicit FeatureLibrary(std::vector<Term> terms);
  static FeatureLibrary parse(const std::vector<std::string>& names);

  /// Per-term multipliers applied to feature values and partials (column
  /// normalization). Defaults to all ones.
  const std::vector<double>& scales() const { return scales_; }
  void set_scales(std::vector<double> scales);

  const std::vector<Term>& terms() const { return terms_; }
  int size() const { return static_cast<int>(terms_.size()); }
  int max_order() const;
  int max_state() const;
  std::vector<std::string> names() const;
  /// Index of the first term equal to `t`, or -1.
  int find(const Term& t) const;

  /// n_terms x n_nodes feature matrix.
  Eigen::MatrixXd eval(const LocalFields& local, double t) const;
  FeaturePartials partials(const LocalFields& local) const;

  /// Folds feature cotangents (n_terms x n_nodes) through the partials into
  /// per-slot state cotangents: out[k](s, i) = sum over terms j of state s
  /// of cot(j, i) * slot[k](j, i).
  std::array<Field, kSlots> contract(const FeaturePartials& partials,
                                     const Eigen::MatrixXd& cot,
                                     int n_states) const;

 private:
  std::vector<Term> terms_;
  std::vector<double> scales_;
};

Eigen::MatrixXd eval_features(const FeatureLibrary& lib, const Field& u,
                              const Grid1D& grid, double t);
FeaturePartials feature_partials(const FeatureLibrary& lib, const Field& u,
                                 const Grid1D& grid);

}  // namespace nclosure

#endif  // NCLOSURE_LIBRARY_HPP
