#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "geosched/cost_estimator.hpp"
#include "geosched/eval_metrics.hpp"
#include "geosched/samplers.hpp"
#include "geosched/schedule_optimizer.hpp"
#include "geosched/score_model.hpp"

namespace geosched {

/// Raised when training produces a non-finite loss or schedule.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Draws n clean data points.
using DataSource = std::function<Points(int n, std::uint64_t seed)>;
DataSource target_data(const GmmTarget& target);

struct TrainConfig {
  NetworkConfig network;
  std::uint64_t seed = 0;
  int batch = 256;
  double learning_rate = 1e-3;
  /// Adam steps per batch before the schedule update.
  int grad_steps = 1;
  /// Schedule mixing weight; 0 keeps the initial schedule fixed.
  double gamma = 0.1;
  CostKind cost = CostKind::Corrector;
  Interpolation interpolation = Interpolation::MonotoneCubic;
  CostOptions cost_options;
  int checkpoint_every = 500;
  /// Points per interval for the diagnostic cost profile logged at checkpoints.
  int diagnostic_samples = 256;
  /// Generated samples for the likelihood / score-error metrics (0 disables them).
  int eval_samples = 0;
  SamplerKind eval_sampler = ReverseSde{};
  ProbeGrid probe = ProbeGrid::geometric(1e-3, 12, 256);
};

struct HistoryRecord {
  long iteration = 0;
  double loss = 0.0;
  double length = 0.0;
  double energy = 0.0;
  /// Relative standard deviation of sqrt(L_i) across intervals.
  double sqrt_cost_rel_std = 0.0;
  std::vector<double> schedule;
  std::optional<double> mean_log_likelihood;
  std::optional<double> score_mse;
};

/// Relative standard deviation (population) of sqrt(L_i).
double sqrt_cost_rel_std(const std::vector<double>& costs);

/// Online training loop that alternates DSM updates with schedule updates
/// from costs measured on the same batch.
class Trainer {
 public:
  Trainer(TrainConfig cfg, DataSource data, NoiseSchedule sched, DiscretisationSchedule initial);
  /// Resumes from a checkpoint carrying training state.
  Trainer(TrainConfig cfg, DataSource data, NoiseSchedule sched, const Checkpoint& ckpt);

  /// One batch: grad_steps DSM updates, then (gamma > 0) a cost estimate on the
  /// same noised batch, update_schedule and mixing. Returns the last DSM loss.
  double step();

  /// Steps until `iteration() == until`, logging diagnostics every
  /// checkpoint_every iterations and calling `on_checkpoint` after each record.
  using CheckpointHook = std::function<void(const Trainer&, const HistoryRecord&)>;
  void run(long until, const CheckpointHook& on_checkpoint = {});

  /// Computes and appends a history record at the current iteration.
  const HistoryRecord& log_diagnostics(const DiffusedGmm* eval_target = nullptr);
  /// Cost profile of the current network on the current schedule from fresh data.
  CostProfile diagnostic_profile(int n_per_interval, std::uint64_t seed) const;

  void set_eval_target(std::optional<DiffusedGmm> target) { eval_target_ = std::move(target); }
  void set_gamma(double gamma);

  long iteration() const { return iteration_; }
  const TrainConfig& config() const { return cfg_; }
  const DiscretisationSchedule& schedule() const { return disc_; }
  const NoiseSchedule& noise_schedule() const { return sched_; }
  std::shared_ptr<const ScoreNetwork> network() const { return net_; }
  ScoreSource score_source() const { return ScoreSource::learned(net_, sched_); }
  const std::vector<HistoryRecord>& history() const { return history_; }
  double last_loss() const { return last_loss_; }

  Checkpoint checkpoint() const;

 private:
  TrainConfig cfg_;
  DataSource data_;
  NoiseSchedule sched_;
  DiscretisationSchedule disc_;
  std::shared_ptr<ScoreNetwork> net_;
  AdamState adam_;
  long iteration_ = 0;
  double last_loss_ = 0.0;
  std::vector<HistoryRecord> history_;
  std::optional<DiffusedGmm> eval_target_;
};

/// One row per record: iteration, loss, length, energy, sqrt_cost_rel_std and,
/// when present, mean_log_likelihood and score_mse.
void write_train_history_csv(const std::filesystem::path& path, const std::vector<HistoryRecord>& history);

}  // namespace geosched
