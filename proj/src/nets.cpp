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

#include "nclosure/nets.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "nclosure/error.hpp"

namespace nclosure {

Activation parse_activation(const std::string& name) {
  if (name == "linear" || name == "none") return Activation::kLinear;
  if (name == "swish") return Activation::kSwish;
  throw InvalidArgument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
  return a == Activation::kLinear ? "linear" : "swish";
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double swish(double z) { return z * sigmoid(z); }

double swish_prime(double z) {
  const double s = sigmoid(z);
  return s + z * s * (1.0 - s);
}

// ---------------------------------------------------------------------------
// Constraints

bool ConstraintSpec::is_derived(int row) const {
  return std::any_of(derived.begin(), derived.end(),
                     [row](const DerivedRow& d) { return d.row == row; });
}

void ConstraintSpec::validate(int n_rows) const {
  std::set<int> seen;
  for (const DerivedRow& d : derived) {
    if (d.row < 0 || d.row >= n_rows) {
      throw InvalidArgument("derived row index out of range");
    }
    if (!seen.insert(d.row).second) {
      throw InvalidArgument("row " + std::to_string(d.row) +
                            " is derived twice");
    }
  }
  for (const DerivedRow& d : derived) {
    for (const auto& [r, c] : d.combination) {
      (void)c;
      if (r < 0 || r >= n_rows) {
        throw InvalidArgument("constraint refers to row out of range");
      }
      if (seen.count(r) != 0) {
        throw InvalidArgument("constraint row " + std::to_string(d.row) +
                              " depends on derived row " + std::to_string(r));
      }
    }
  }
}

void apply_constraints(const ConstraintSpec& spec,
                       Eigen::Ref<RowMatrix> weights) {
  spec.validate(static_cast<int>(weights.rows()));
  for (const DerivedRow& d : spec.derived) {
    weights.row(d.row).setZero();
    for (const auto& [r, c] : d.combination) {
      weights.row(d.row) += c * weights.row(r);
    }
  }
}

void project_constraint_grads(const ConstraintSpec& spec,
                              Eigen::Ref<RowMatrix> grads) {
  spec.validate(static_cast<int>(grads.rows()));
  for (const DerivedRow& d : spec.derived) {
    for (const auto& [r, c] : d.combination) {
      grads.row(r) += c * grads.row(d.row);
    }
  }
  for (const DerivedRow& d : spec.derived) grads.row(d.row).setZero();
}

// ---------------------------------------------------------------------------
// DenseNet

DenseNet::DenseNet(int n_in, std::vector<LayerSpec> layers)
    : n_in_(n_in), layers_(std::move(layers)) {
  if (n_in < 1) throw InvalidArgument("network input width must be >= 1");
  if (layers_.empty()) throw InvalidArgument("network needs a layer");
  std::size_t total = 0;
  int in = n_in;
  for (const LayerSpec& l : layers_) {
    if (l.out < 1) throw InvalidArgument("layer width must be >= 1");
    offsets_.push_back(total);
    total += static_cast<std::size_t>(in) * static_cast<std::size_t>(l.out);
    in = l.out;
  }
  params_.assign(total, 0.0);
  mask_.assign(total, 0);
  derived_.assign(total, 0);
}

int DenseNet::layer_in(std::size_t l) const {
  return l == 0 ? n_in_ : layers_[l - 1].out;
}

int DenseNet::n_out() const {
  return map_ ? static_cast<int>(map_->rows()) : layers_.back().out;
}

std::size_t DenseNet::effective_param_count() const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < params_.size(); ++p) n += trainable(p) ? 1 : 0;
  return n;
}

std::size_t DenseNet::free_param_count() const {
  return params_.size() -
         static_cast<std::size_t>(
             std::count(derived_.begin(), derived_.end(), std::uint8_t{1}));
}

Eigen::Map<RowMatrix> DenseNet::weights(std::size_t l) {
  return {params_.data() + offsets_[l], layers_[l].out, layer_in(l)};
}

Eigen::Map<const RowMatrix> DenseNet::weights(std::size_t l) const {
  return {params_.data() + offsets_[l], layers_[l].out, layer_in(l)};
}

void DenseNet::set_prune_mask(std::vector<std::uint8_t> mask) {
  if (mask.size() != params_.size()) {
    throw InvalidArgument("prune mask size does not match parameter count");
  }
  mask_ = std::move(mask);
  enforce_mask();
}

std::size_t DenseNet::n_pruned() const {
  return static_cast<std::size_t>(
      std::count(mask_.begin(), mask_.end(), std::uint8_t{1}));
}

void DenseNet::set_output_scale(OutputScale scale) {
  if (scale.enabled && (scale.index < 0 || scale.index >= n_in_)) {
    throw InvalidArgument("output scale index outside input width");
  }
  scale_ = scale;
}

void DenseNet::set_output_map(std::optional<RowMatrix> map) {
  if (map && map->cols() != layers_.back().out) {
    throw InvalidArgument("output map columns must equal last layer width");
  }
  map_ = std::move(map);
}

void DenseNet::add_constraint(ConstraintSpec spec) {
  if (spec.layer < 0 || static_cast<std::size_t>(spec.layer) >= n_layers()) {
    throw InvalidArgument("constraint layer out of range");
  }
  spec.validate(layers_[static_cast<std::size_t>(spec.layer)].out);
  for (const ConstraintSpec& c : constraints_) {
    if (c.layer == spec.layer) {
      throw InvalidArgument("layer already constrained");
    }
  }
  constraints_.push_back(std::move(spec));
  rebuild_derived_mask();
  apply_constraints();
}

void DenseNet::rebuild_derived_mask() {
  std::fill(derived_.begin(), derived_.end(), std::uint8_t{0});
  for (const ConstraintSpec& c : constraints_) {
    const auto l = static_cast<std::size_t>(c.layer);
    const auto in = static_cast<std::size_t>(layer_in(l));
    for (const DerivedRow& d : c.derived) {
      const std::size_t start = offsets_[l] + static_cast<std::size_t>(d.row) * in;
      std::fill_n(derived_.begin() + static_cast<std::ptrdiff_t>(start), in,
                  std::uint8_t{1});
    }
  }
}

void DenseNet::apply_constraints() {
  for (const ConstraintSpec& c : constraints_) {
    nclosure::apply_constraints(c, weights(static_cast<std::size_t>(c.layer)));
  }
}

std::size_t DenseNet::prune(double threshold) {
  if (!(threshold >= 0.0)) throw InvalidArgument("prune threshold must be >= 0");
  std::size_t count = 0;
  for (std::size_t p = 0; p < params_.size(); ++p) {
    if (mask_[p] || derived_[p]) continue;
    if (std::abs(params_[p]) < threshold) {
      params_[p] = 0.0;
      mask_[p] = 1;
      ++count;
    }
  }
  if (count > 0) apply_constraints();
  return count;
}

void DenseNet::enforce_mask() {
  for (std::size_t p = 0; p < params_.size(); ++p) {
    if (mask_[p]) params_[p] = 0.0;
  }
}

void DenseNet::check_input(const Eigen::MatrixXd& x) const {
  if (x.rows() != n_in_) {
    throw InvalidArgument("network expects " + std::to_string(n_in_) +
                          " inputs, got " + std::to_string(x.rows()));
  }
}

Eigen::MatrixXd DenseNet::forward(const Eigen::MatrixXd& x) const {
  check_input(x);
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Eigen::MatrixXd z = weights(l) * a;
    if (layers_[l].activation == Activation::kSwish) {
      z = z.unaryExpr([](double v) { return swish(v); });
    }
    a = std::move(z);
  }
  if (map_) a = (*map_) * a;
  if (scale_.enabled) {
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      a.col(c) *= std::abs(x(scale_.index, c));
    }
  }
  return a;
}

Eigen::VectorXd DenseNet::forward(const Eigen::VectorXd& x) const {
  return forward(Eigen::MatrixXd(x)).col(0);
}

void DenseNet::vjp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& cot,
                   Eigen::MatrixXd* input_cot,
                   std::span<double> param_grad) const {
  check_input(x);
  if (cot.rows() != n_out() || cot.cols() != x.cols()) {
    throw InvalidArgument("cotangent shape does not match network output");
  }
  if (!param_grad.empty() && param_grad.size() != params_.size()) {
    throw InvalidArgument("parameter gradient buffer has wrong size");
  }

  // Forward sweep keeping pre-activations and layer inputs.
  std::vector<Eigen::MatrixXd> inputs(layers_.size());
  std::vector<Eigen::MatrixXd> pre(layers_.size());
  Eigen::MatrixXd a = x;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    inputs[l] = a;
    pre[l] = weights(l) * a;
    a = layers_[l].activation == Activation::kSwish
            ? Eigen::MatrixXd(pre[l].unaryExpr([](double v) { return swish(v); }))
            : pre[l];
  }

  Eigen::MatrixXd g = cot;
  Eigen::RowVectorXd scale_cot;
  if (scale_.enabled) {
    // d/dx_d of y * |x_d| contributes sign(x_d) * <cot, y_unscaled>, with
    // subgradient 0 at x_d = 0.
    const Eigen::MatrixXd mapped = map_ ? Eigen::MatrixXd((*map_) * a) : a;
    scale_cot.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double xd = x(scale_.index, c);
      const double sgn = xd > 0.0 ? 1.0 : (xd < 0.0 ? -1.0 : 0.0);
      scale_cot[c] = sgn * cot.col(c).dot(mapped.col(c));
      g.col(c) *= std::abs(xd);
    }
  }
  if (map_) g = map_->transpose() * g;

  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (layers_[l].activation == Activation::kSwish) {
      g.array() *= pre[l].unaryExpr([](double v) { return swish_prime(v); })
                       .array();
    }
    if (!param_grad.empty()) {
      Eigen::Map<RowMatrix> gw(param_grad.data() + offsets_[l],
                               layers_[l].out, layer_in(l));
      gw.noalias() += g * inputs[l].transpose();
    }
    if (l > 0 || input_cot != nullptr) {
      g = weights(l).transpose() * g;
    }
  }
  if (!param_grad.empty()) {
    for (std::size_t p = 0; p < params_.size(); ++p) {
      if (mask_[p]) param_grad[p] = 0.0;
    }
  }
  if (input_cot != nullptr) {
    if (scale_.enabled) g.row(scale_.index) += scale_cot;
    *input_cot = std::move(g);
  }
}

Eigen::MatrixXd DenseNet::vjp_input(const Eigen::MatrixXd& x,
                                    const Eigen::MatrixXd& cot) const {
  Eigen::MatrixXd out;
  vjp(x, cot, &out, {});
  return out;
}

std::vector<double> DenseNet::vjp_params(const Eigen::MatrixXd& x,
                                         const Eigen::MatrixXd& cot) const {
  std::vector<double> grad(params_.size(), 0.0);
  vjp(x, cot, nullptr, grad);
  return grad;
}

std::string DenseNet::param_name(std::size_t p) const {
  std::size_t l = layers_.size() - 1;
  while (offsets_[l] > p) --l;
  const std::size_t local = p - offsets_[l];
  const auto in = static_cast<std::size_t>(layer_in(l));
  return "L" + std::to_string(l) + ".r" + std::to_string(local / in) + ".c" +
         std::to_string(local % in);
}

// ---------------------------------------------------------------------------
// Initialization

InitKind parse_init_kind(const std::string& name) {
  if (name == "zeros") return InitKind::kZeros;
  if (name == "uniform") return InitKind::kUniform;
  if (name == "glorot_uniform") return InitKind::kGlorotUniform;
  throw InvalidArgument("unknown initializer '" + name + "'");
}

void initialize(DenseNet& net, InitKind kind, double scale,
                std::mt19937_64& rng) {
  auto params = net.params();
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    double limit = scale;
    if (kind == InitKind::kGlorotUniform) {
      limit = scale * std::sqrt(6.0 / (net.layer_in(l) + net.layer_out(l)));
    }
    std::uniform_real_distribution<double> dist(-limit, limit);
    const std::size_t begin = net.layer_offset(l);
    const std::size_t end =
        begin + static_cast<std::size_t>(net.layer_in(l) * net.layer_out(l));
    for (std::size_t p = begin; p < end; ++p) {
      const double draw = kind == InitKind::kZeros ? 0.0 : dist(rng);
      params[p] = net.trainable(p) ? draw : 0.0;
    }
  }
  net.apply_constraints();
}

// ---------------------------------------------------------------------------
// Presets

namespace presets {

DenseNet interpretable_linear(int n_terms, int n_out) {
  return DenseNet(n_terms, {{n_out, Activation::kLinear}});
}

DenseNet shock_memory_net(int u_index) {
  DenseNet net(5, {{10, Activation::kSwish},
                   {7, Activation::kSwish},
                   {5, Activation::kSwish},
                   {5, Activation::kSwish},
                   {3, Activation::kSwish},
                   {1, Activation::kLinear}});
  net.set_output_scale({true, u_index});
  return net;
}

DenseNet tracer_markovian_net(double c_p, double c_z, double c_d,
                              double rho_w) {
  DenseNet net(6, {{6, Activation::kLinear}});
  const double inv_rho = 1.0 / rho_w;
  ConstraintSpec spec;
  spec.layer = 0;
  spec.derived = {
      {0, {{1, -1.0}, {2, -1.0}, {3, -1.0}}},
      {4, {{1, -c_p}, {2, -c_z}, {3, -c_d}}},
      {5, {{1, inv_rho}, {2, inv_rho}, {3, inv_rho}}},
  };
  net.add_constraint(std::move(spec));
  return net;
}

DenseNet reduced_markovian_net(double c_z, double rho_w) {
  DenseNet net(4, {{5, Activation::kLinear}});
  ConstraintSpec spec;
  spec.layer = 0;
  spec.derived = {
      {0, {{2, -1.0}}},
      {1, {}},
      {3, {{2, -c_z}}},
      {4, {{2, 1.0 / rho_w}}},
  };
  net.add_constraint(std::move(spec));
  return net;
}

DenseNet reduced_memory_net(double rho_w) {
  DenseNet net(4, {{5, Activation::kSwish},
                   {5, Activation::kSwish},
                   {4, Activation::kLinear}});
  RowMatrix map = RowMatrix::Zero(5, 4);
  map(0, 0) = -1.0;
  map(0, 1) = -1.0;
  map(1, 0) = 1.0;
  map(2, 1) = 1.0;
  map(3, 2) = 1.0;
  map(4, 3) = 1.0 / rho_w;
  net.set_output_map(std::move(map));
  return net;
}

}  // namespace presets

}  // namespace nclosure
