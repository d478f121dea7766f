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

#include "nclosure/library.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "nclosure/error.hpp"
#include "nclosure/stencil.hpp"

namespace nclosure {
namespace {

struct TermInfo {
  TermKind kind;
  const char* name;
  int order;
  bool reads_state;
};

constexpr TermInfo kTerms[] = {
    {TermKind::kU, "u", 0, true},         {TermKind::kU2, "u2", 0, true},
    {TermKind::kUx, "ux", 1, true},       {TermKind::kUUx, "u_ux", 1, true},
    {TermKind::kUxx, "uxx", 2, true},     {TermKind::kUxxx, "uxxx", 3, true},
    {TermKind::kUUxx, "u_uxx", 2, true},  {TermKind::kX, "x", 0, false},
    {TermKind::kT, "t", 0, false},        {TermKind::kOne, "one", 0, false},
};

const TermInfo& info(TermKind k) {
  for (const TermInfo& t : kTerms) {
    if (t.kind == k) return t;
  }
  throw InvalidArgument("unknown term kind");
}

}  // namespace

std::string Term::name() const {
  std::string n = info(kind).name;
  if (reads_state() && state != 0) n += "@" + std::to_string(state);
  return n;
}

int Term::order() const { return info(kind).order; }
bool Term::reads_state() const { return info(kind).reads_state; }

Term parse_term(const std::string& text) {
  std::string base = text;
  int state = 0;
  if (const auto at = text.find('@'); at != std::string::npos) {
    base = text.substr(0, at);
    const std::string idx = text.substr(at + 1);
    if (idx.empty() ||
        !std::all_of(idx.begin(), idx.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw InvalidArgument("bad state index in term '" + text + "'");
    }
    state = std::stoi(idx);
  }
  for (const TermInfo& t : kTerms) {
    if (base == t.name) {
      if (!t.reads_state && state != 0) {
        throw InvalidArgument("term '" + base + "' takes no state index");
      }
      return Term{t.kind, state};
    }
  }
  throw InvalidArgument("unknown library term '" + text + "'");
}

LocalFields compute_local_fields(const Field& u, const Grid1D& grid,
                                 int max_order) {
  if (u.cols() != grid.n_nodes) {
    throw InvalidArgument("field width does not match grid");
  }
  LocalFields lf;
  lf.d[0] = u;
  for (int k = 1; k < kSlots; ++k) {
    lf.d[static_cast<std::size_t>(k)].resize(u.rows(), u.cols());
    if (k > max_order) {
      lf.d[static_cast<std::size_t>(k)].setZero();
      continue;
    }
    for (Eigen::Index s = 0; s < u.rows(); ++s) {
      spatial_derivative(
          std::span<const double>(u.row(s).data(), static_cast<std::size_t>(u.cols())), k,
          grid,
          std::span<double>(lf.d[static_cast<std::size_t>(k)].row(s).data(),
                            static_cast<std::size_t>(u.cols())));
    }
  }
  lf.x = grid.nodes();
  return lf;
}

FeatureLibrary::FeatureLibrary(std::vector<Term> terms)
    : terms_(std::move(terms)), scales_(terms_.size(), 1.0) {
  if (terms_.empty()) throw InvalidArgument("function library is empty");
}

void FeatureLibrary::set_scales(std::vector<double> scales) {
  if (scales.size() != terms_.size()) {
    throw InvalidArgument("one scale per library term required");
  }
  for (double v : scales) {
    if (!std::isfinite(v) || v == 0.0) {
      throw InvalidArgument("library scales must be finite and nonzero");
    }
  }
  scales_ = std::move(scales);
}

FeatureLibrary FeatureLibrary::parse(const std::vector<std::string>& names) {
  std::vector<Term> terms;
  terms.reserve(names.size());
  for (const std::string& n : names) terms.push_back(parse_term(n));
  return FeatureLibrary(std::move(terms));
}

int FeatureLibrary::max_order() const {
  int m = 0;
  for (const Term& t : terms_) m = std::max(m, t.order());
  return m;
}

int FeatureLibrary::max_state() const {
  int m = 0;
  for (const Term& t : terms_) m = std::max(m, t.state);
  return m;
}

std::vector<std::string> FeatureLibrary::names() const {
  std::vector<std::string> out;
  for (const Term& t : terms_) out.push_back(t.name());
  return out;
}

int FeatureLibrary::find(const Term& t) const {
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    if (terms_[j] == t) return static_cast<int>(j);
  }
  return -1;
}

Eigen::MatrixXd FeatureLibrary::eval(const LocalFields& lf, double t) const {
  const Eigen::Index n = lf.d[0].cols();
  Eigen::MatrixXd f(size(), n);
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Term& term = terms_[j];
    if (term.reads_state() && term.state >= lf.d[0].rows()) {
      throw InvalidArgument("term '" + term.name() + "' reads a missing state");
    }
    const auto s = term.state;
    auto row = f.row(static_cast<Eigen::Index>(j)).array();
    switch (term.kind) {
      case TermKind::kU: row = lf.d[0].row(s); break;
      case TermKind::kU2: row = lf.d[0].row(s).square(); break;
      case TermKind::kUx: row = lf.d[1].row(s); break;
      case TermKind::kUUx: row = lf.d[0].row(s) * lf.d[1].row(s); break;
      case TermKind::kUxx: row = lf.d[2].row(s); break;
      case TermKind::kUxxx: row = lf.d[3].row(s); break;
      case TermKind::kUUxx: row = lf.d[0].row(s) * lf.d[2].row(s); break;
      case TermKind::kX: row = lf.x.transpose(); break;
      case TermKind::kT: row.setConstant(t); break;
      case TermKind::kOne: row.setOnes(); break;
    }
    if (scales_[j] != 1.0) row *= scales_[j];
  }
  return f;
}

FeaturePartials FeatureLibrary::partials(const LocalFields& lf) const {
  const Eigen::Index n = lf.d[0].cols();
  FeaturePartials p;
  for (auto& s : p.slot) s = Eigen::MatrixXd::Zero(size(), n);
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const auto s = terms_[j].state;
    switch (terms_[j].kind) {
      case TermKind::kU: p.slot[0].row(jj).setOnes(); break;
      case TermKind::kU2:
        p.slot[0].row(jj).array() = 2.0 * lf.d[0].row(s);
        break;
      case TermKind::kUx: p.slot[1].row(jj).setOnes(); break;
      case TermKind::kUUx:
        p.slot[0].row(jj).array() = lf.d[1].row(s);
        p.slot[1].row(jj).array() = lf.d[0].row(s);
        break;
      case TermKind::kUxx: p.slot[2].row(jj).setOnes(); break;
      case TermKind::kUxxx: p.slot[3].row(jj).setOnes(); break;
      case TermKind::kUUxx:
        p.slot[0].row(jj).array() = lf.d[2].row(s);
        p.slot[2].row(jj).array() = lf.d[0].row(s);
        break;
      case TermKind::kX:
      case TermKind::kT:
      case TermKind::kOne: break;
    }
    if (scales_[j] != 1.0) {
      for (auto& slot : p.slot) slot.row(jj) *= scales_[j];
    }
  }
  return p;
}

std::array<Field, kSlots> FeatureLibrary::contract(
    const FeaturePartials& partials, const Eigen::MatrixXd& cot,
    int n_states) const {
  const Eigen::Index n = cot.cols();
  std::array<Field, kSlots> out;
  for (auto& f : out) f = Field::Zero(n_states, n);
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    const Term& term = terms_[j];
    if (!term.reads_state()) continue;
    const auto jj = static_cast<Eigen::Index>(j);
    for (int k = 0; k <= std::max(term.order(), 0); ++k) {
      const auto kk = static_cast<std::size_t>(k);
      out[kk].row(term.state) +=
          cot.row(jj).array() * partials.slot[kk].row(jj).array();
    }
  }
  return out;
}

Eigen::MatrixXd eval_features(const FeatureLibrary& lib, const Field& u,
                              const Grid1D& grid, double t) {
  return lib.eval(compute_local_fields(u, grid, lib.max_order()), t);
}

FeaturePartials feature_partials(const FeatureLibrary& lib, const Field& u,
                                 const Grid1D& grid) {
  return lib.partials(compute_local_fields(u, grid, lib.max_order()));
}

}  // namespace nclosure
