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

// Experiment configuration, synthetic high-fidelity data generation and the
// experiment drivers behind the command-line tool.

#ifndef NCLOSURE_SCENARIO_HPP
#define NCLOSURE_SCENARIO_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nclosure/baseline.hpp"
#include "nclosure/core.hpp"
#include "nclosure/forward.hpp"
#include "nclosure/train.hpp"

namespace nclosure {

/// u_s(x) = offset_s + sum over modes of a sin(2 pi k xi) + b cos(2 pi k xi),
/// xi = (x - x_min) / length.
struct FourierMode {
  int state = 0;
  double k = 1.0;
  double a = 0.0;
  double b = 0.0;
};

struct InitialCondition {
  std::vector<double> offset;
  std::vector<FourierMode> modes;

  Field evaluate(const Grid1D& grid, int n_states) const;
};

struct DataSpec {
  double dt = 0.01;
  double t_train = 0.0;
  double t_val = 0.0;
  double t_future = 0.0;
  double noise = 0.0;
};

struct ScenarioConfig {
  std::string name = "scenario";
  int n_states = 1;
  Grid1D grid;
  int hifi_nodes = 0;
  std::vector<BaseTermSpec> base;
  std::vector<BaseTermSpec> true_extra;
  InitialCondition ic;
  double dt = 1e-3;
  double hifi_dt = 1e-3;
  DataSpec data;

  Grid1D hifi_grid() const;
  /// Ratio between high-fidelity and model node spacing.
  int restriction_factor() const;
};

/// How to build one closure network.
struct NetSpec {
  std::vector<std::string> library;
  /// Empty for a plain network from `layers`.
  std::string preset;
  std::vector<LayerSpec> layers;
  std::optional<int> output_scale;
  InitKind init = InitKind::kGlorotUniform;
  double init_scale = 1.0;
  /// "none", or "rms": divide each feature by its root-mean-square over the
  /// training snapshots of all scenarios.
  std::string feature_scaling = "none";
};

/// Constants for the tied-row presets.
struct TracerConstants {
  double c_p = 6.625;
  double c_z = 5.625;
  double c_d = 6.0;
  double rho_w = 1000.0;
};

struct GradcheckSpec {
  double dt = 1e-3;
  int n_steps = 200;
  double epsilon = 1e-5;
  /// Loss at every `data_every`-th step.
  int data_every = 50;
  /// Denominator floor as a fraction of the largest |fd| in each network.
  double floor_fraction = 1e-3;
};

enum class ExperimentKind { kGeneric, kExp1a, kExp1b, kConstrained };

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kGeneric;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::vector<ScenarioConfig> scenarios;
  std::optional<NetSpec> markovian;
  std::optional<NetSpec> memory;
  double tau = 0.0;
  /// When positive, tau = tau_steps * (model dt of the scenario in use).
  int tau_steps = 0;
  TracerConstants tracer;
  TrainConfig train;
  double smagorinsky_cs = kDefaultSmagorinskyCs;
  GradcheckSpec gradcheck;

  void validate() const;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// Known-physics base term of a scenario, or nullopt for an empty list.
std::optional<NetTerm> scenario_base(const ScenarioConfig& sc);

/// Snapshots on the model grid at multiples of data.dt in [0, t_future],
/// from the true model (base plus extra terms) integrated on the
/// high-fidelity grid and subsampled. `seed` drives optional noise.
SnapshotSeries generate_snapshots(const ScenarioConfig& sc, std::uint64_t seed);

/// Snapshots with times in (from, to], plus the one at `from` when
/// `include_start`.
SnapshotSeries window(const SnapshotSeries& s, double from, double to,
                      bool include_start);

Scenario make_scenario(const ScenarioConfig& sc, const SnapshotSeries& data);

/// Builds the closure networks from the specs, drawing initial weights from
/// `rng`. `train_data` (one series per scenario) feeds RMS feature scaling.
Closure build_closure(const ExperimentConfig& cfg, std::mt19937_64& rng,
                      const std::vector<SnapshotSeries>& train_data = {});

/// Per-term RMS of raw library features over the given snapshots (1 where a
/// feature is identically zero).
std::vector<double> feature_rms(const FeatureLibrary& lib,
                                const std::vector<Grid1D>& grids,
                                const std::vector<SnapshotSeries>& data);

/// Root-mean-square over states and nodes.
double rmse(const Field& a, const Field& b);

struct RolloutError {
  std::vector<double> times;
  /// Per-snapshot RMSE; +inf from the blow-up time on.
  std::vector<double> rmse;
};

/// One continuous rollout from the first snapshot of `truth` through its
/// last, compared with every snapshot. Without `history` the first snapshot
/// is extended backwards as a constant.
RolloutError rollout_error(const ClosureModel& model, const Grid1D& grid,
                           double dt, const SnapshotSeries& truth,
                           const HistoryFn* history = nullptr);

/// sqrt(mean of squared per-snapshot RMSE) over times in (from, to].
double window_rmse(const RolloutError& e, double from, double to);

struct GradcheckRow {
  std::string param_id;
  double adjoint = 0.0;
  double fd = 0.0;
  double rel_err = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;
  double max_rel_err = 0.0;
};

/// Central finite differences against adjoint gradients for every free
/// weight of the closure on the first scenario. `dt_override` > 0 replaces
/// the configured step (and scales tau with it when tau was tied to dt).
GradcheckReport gradcheck(const ExperimentConfig& cfg, double dt_override = 0.0);

// Command drivers. Each writes into cfg.out_dir and returns a short summary.
std::string run_generate_data(const ExperimentConfig& cfg);
std::string run_train(const ExperimentConfig& cfg);
std::string run_evaluate(const ExperimentConfig& cfg,
                         const std::string& weights_path,
                         const std::string& window_name);
/// Also stores the largest relative error in `max_rel_err` when given.
std::string run_gradcheck(const ExperimentConfig& cfg,
                          double* max_rel_err = nullptr);

/// Exp-1a style report rows: one per library term of a single-output
/// linear Markovian closure. Coefficients are in physical units (weight
/// times feature scale).
struct CoefficientRow {
  std::string term;
  double coefficient = 0.0;
  bool pruned = false;
};
std::vector<CoefficientRow> linear_coefficients(const Closure& closure);

/// Conservation diagnostics for a tied-row tracer closure.
struct ConservationReport {
  /// Largest nodewise |sum of conserved closure outputs| over random inputs
  /// and over the rollout.
  double max_identity_residual = 0.0;
  double drift_base = 0.0;
  double drift_closed = 0.0;
  /// |drift_closed - drift_base| / |initial total|.
  double drift_gap_rel = 0.0;
};
ConservationReport conservation_report(const ScenarioConfig& sc,
                                       const Closure& closure,
                                       const SnapshotSeries& data,
                                       std::uint64_t seed);

}  // namespace nclosure

#endif  // NCLOSURE_SCENARIO_HPP
