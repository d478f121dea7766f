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

// Training protocol: short-sequence batches, RMSprop with exponential
// learning-rate decay, L1/L2 penalties, tied-row projection, magnitude
// pruning and round-robin over scenarios.

#ifndef NCLOSURE_TRAIN_HPP
#define NCLOSURE_TRAIN_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "nclosure/adjoint.hpp"
#include "nclosure/core.hpp"
#include "nclosure/forward.hpp"

namespace nclosure {

struct TrainConfig {
  /// Snapshots per short sequence, start included.
  int batch_time = 3;
  /// Every `stride`-th snapshot after the start is a target.
  int stride = 1;
  int batch_size = 16;
  int epochs = 1;
  /// 0 selects iterations_per_epoch() over all training snapshots.
  int iters_per_epoch = 0;
  double lr0 = 0.075;
  double decay_rate = 0.97;
  double decay_steps = 4.0;
  double l1 = 0.0;
  double l2 = 0.0;
  /// 0 disables pruning.
  double prune_threshold = 0.0;
  LossKind loss = LossKind::kMse;
  double rho = 0.9;
  double eps = 1e-8;
  std::uint64_t seed = 0;
  /// Consecutive iterations spent on one scenario before moving on.
  int block_size = 1;
  /// Batches lost to blow-up tolerated before training aborts.
  int skip_budget = 10;

  void validate() const;
};

/// ceil(n / (B S) + 1), in integer arithmetic.
int iterations_per_epoch(int n_steps, int batch_size, int batch_time);

/// lr0 * decay_rate^(iter / decay_steps) with a real exponent.
double lr_at(long iter, double lr0, double decay_rate, double decay_steps);

struct OptimState {
  std::vector<double> v;
  double rho = 0.9;
  double eps = 1e-8;
  long iter = 0;

  OptimState() = default;
  OptimState(std::size_t n, double rho_, double eps_)
      : v(n, 0.0), rho(rho_), eps(eps_) {}
};

/// v <- rho v + (1 - rho) g^2; p <- p - lr g / (sqrt(v) + eps). Entries with
/// `frozen[p]` set are left untouched (state included). `frozen` may be empty.
void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  OptimState& st, double lr,
                  std::span<const std::uint8_t> frozen = {});

/// g += l1 sign(p) + 2 l2 p for every entry not marked in `pruned`.
void add_regularization(std::span<double> grads,
                        std::span<const double> params, double l1, double l2,
                        std::span<const std::uint8_t> pruned = {});

/// One simulation setting: grid, known physics, and snapshots restricted to
/// the model grid. Training snapshots precede validation snapshots in time.
struct Scenario {
  std::string name;
  Grid1D grid;
  int n_states = 1;
  std::optional<NetTerm> base;
  double dt = 1e-3;
  SnapshotSeries train;
  SnapshotSeries val;
};

/// The shared closure being learned: Markovian and/or memory term and tau.
struct Closure {
  std::optional<NetTerm> markovian;
  std::optional<NetTerm> memory;
  double tau = 0.0;
};

/// Closure model for one scenario: its base physics plus the shared terms.
ClosureModel assemble_model(const Scenario& sc, const Closure& closure,
                            double smagorinsky_cs = 0.0);

struct Sequence {
  std::size_t start = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  Field initial;
  DataSet data;
};

/// Valid start indices for sequences of `batch_time` snapshots.
std::size_t sequence_starts(const SnapshotSeries& series, int batch_time);

/// Draws up to B distinct start indices uniformly (fewer when the series has
/// fewer starts) and builds each sequence's targets.
std::vector<Sequence> sample_batch(const SnapshotSeries& series,
                                   const TrainConfig& cfg, std::mt19937_64& rng);

/// Data interpolant over the series, used as history for memory terms.
HistoryFn series_history(const SnapshotSeries& series);

/// Loss of one free rollout from the last training snapshot over the
/// validation snapshots; +inf on blow-up, NaN without validation data.
double rollout_loss(const Scenario& sc, const ClosureModel& model,
                    LossKind loss);

struct EpochRecord {
  int epoch = 0;
  long iter = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  std::size_t n_pruned = 0;
  int n_skipped = 0;
};

struct TrainResult {
  std::vector<EpochRecord> curve;
  int n_skipped = 0;
};

/// Called after every epoch with the current closure.
using EpochCallback =
    std::function<void(const EpochRecord&, const Closure&)>;

TrainResult train_run(const std::vector<Scenario>& scenarios, Closure& closure,
                      const TrainConfig& cfg,
                      const EpochCallback& on_epoch = nullptr);

/// `epoch,iter,train_loss,val_loss,lr,n_pruned,n_skipped`.
void write_loss_csv(const std::string& path,
                    const std::vector<EpochRecord>& curve);

}  // namespace nclosure

#endif  // NCLOSURE_TRAIN_HPP
