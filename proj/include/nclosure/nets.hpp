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

// Bias-free dense networks with reverse-mode products, tied-row constraints
// and magnitude pruning.

#ifndef NCLOSURE_NETS_HPP
#define NCLOSURE_NETS_HPP

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nclosure {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation { kLinear, kSwish };

Activation parse_activation(const std::string& name);
std::string to_string(Activation a);

/// swish(z) = z * sigmoid(z).
double swish(double z);
double swish_prime(double z);

struct LayerSpec {
  int out = 1;
  Activation activation = Activation::kLinear;
};

/// Multiplies the network output by |x[index]| when enabled.
struct OutputScale {
  bool enabled = false;
  int index = 0;
};

/// A row of a layer's weight matrix that is overwritten by a fixed linear
/// combination of free rows. An empty combination pins the row at zero.
struct DerivedRow {
  int row = 0;
  std::vector<std::pair<int, double>> combination;
};

struct ConstraintSpec {
  int layer = 0;
  std::vector<DerivedRow> derived;

  /// Throws if a row is derived twice, a combination refers to a derived
  /// row, or an index falls outside [0, n_rows).
  void validate(int n_rows) const;
  bool is_derived(int row) const;
};

/// Overwrites every derived row of W with its combination of free rows.
void apply_constraints(const ConstraintSpec& spec,
                       Eigen::Ref<RowMatrix> weights);

/// Folds derived-row gradients into the free rows they depend on (chain rule
/// through the tying map) and zeroes the derived rows.
void project_constraint_grads(const ConstraintSpec& spec,
                              Eigen::Ref<RowMatrix> grads);

/// Fully connected network without bias vectors. Weights live in one flat
/// vector, layer by layer, each layer row-major (out x in).
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(int n_in, std::vector<LayerSpec> layers);

  int n_in() const { return n_in_; }
  /// Output width after the optional output map.
  int n_out() const;
  std::size_t n_layers() const { return layers_.size(); }
  int layer_in(std::size_t l) const;
  int layer_out(std::size_t l) const { return layers_[l].out; }
  Activation activation(std::size_t l) const { return layers_[l].activation; }
  std::size_t layer_offset(std::size_t l) const { return offsets_[l]; }

  std::size_t param_count() const { return params_.size(); }
  /// Weights that are neither in a derived row nor pruned.
  std::size_t effective_param_count() const;
  /// Weights outside derived rows, pruned or not.
  std::size_t free_param_count() const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  Eigen::Map<RowMatrix> weights(std::size_t l);
  Eigen::Map<const RowMatrix> weights(std::size_t l) const;

  /// 1 marks a pruned weight; pruned weights are exactly zero.
  const std::vector<std::uint8_t>& prune_mask() const { return mask_; }
  void set_prune_mask(std::vector<std::uint8_t> mask);
  std::size_t n_pruned() const;

  /// True for weights that sit in a derived row of some constraint.
  const std::vector<std::uint8_t>& derived_mask() const { return derived_; }
  /// Trainable = not derived and not pruned.
  bool trainable(std::size_t p) const { return !mask_[p] && !derived_[p]; }

  const OutputScale& output_scale() const { return scale_; }
  void set_output_scale(OutputScale scale);

  const std::optional<RowMatrix>& output_map() const { return map_; }
  void set_output_map(std::optional<RowMatrix> map);

  const std::vector<ConstraintSpec>& constraints() const {
    return constraints_;
  }
  void add_constraint(ConstraintSpec spec);
  void apply_constraints();

  /// Zeros every unmasked, underived weight with |w| < threshold and marks
  /// it pruned. Returns the number newly pruned.
  std::size_t prune(double threshold);

  /// Re-zeroes pruned weights (after an external write to params()).
  void enforce_mask();

  /// Column-batched evaluation: X is n_in x n_samples.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

  /// Reverse-mode pass for cotangent C (n_out x n_samples). Writes the input
  /// cotangents when `input_cot` is set and accumulates the parameter
  /// cotangents summed over samples when `param_grad` is nonempty. Pruned
  /// weights receive zero.
  void vjp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& cot,
           Eigen::MatrixXd* input_cot, std::span<double> param_grad) const;

  Eigen::MatrixXd vjp_input(const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& cot) const;
  std::vector<double> vjp_params(const Eigen::MatrixXd& x,
                                 const Eigen::MatrixXd& cot) const;

  /// Stable name of weight p, e.g. "L1.r0.c3".
  std::string param_name(std::size_t p) const;

 private:
  void check_input(const Eigen::MatrixXd& x) const;
  void rebuild_derived_mask();

  int n_in_ = 0;
  std::vector<LayerSpec> layers_;
  std::vector<std::size_t> offsets_;
  std::vector<double> params_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint8_t> derived_;
  OutputScale scale_;
  std::optional<RowMatrix> map_;
  std::vector<ConstraintSpec> constraints_;
};

enum class InitKind { kZeros, kUniform, kGlorotUniform };

InitKind parse_init_kind(const std::string& name);

/// Draws every trainable weight, then re-derives tied rows. `scale` is the
/// half-width for kUniform and a multiplier on the Glorot limit otherwise.
void initialize(DenseNet& net, InitKind kind, double scale,
                std::mt19937_64& rng);

/// Network shapes used by the reference experiments.
namespace presets {

/// Linear 4 -> 1 map over a function library.
DenseNet interpretable_linear(int n_terms = 4, int n_out = 1);

/// 5 -> 10 -> 7 -> 5 -> 5 -> 3 -> 1, swish hidden, linear output, output
/// scaled by |input[u_index]|. 198 weights.
DenseNet shock_memory_net(int u_index = 0);

/// 6 -> 6 linear with rows tied so the first four outputs sum to zero and
/// the last two follow the carbon and alkalinity bookkeeping. 18 effective.
DenseNet tracer_markovian_net(double c_p, double c_z, double c_d,
                              double rho_w);

/// 4 -> 5 linear with one free row. 4 effective.
DenseNet reduced_markovian_net(double c_z, double rho_w);

/// 4 -> 5 -> 5 -> 4 swish net followed by a fixed 5 x 4 output map. 65
/// weights.
DenseNet reduced_memory_net(double rho_w);

}  // namespace presets

}  // namespace nclosure

#endif  // NCLOSURE_NETS_HPP
