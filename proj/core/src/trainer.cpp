#include "geosched/trainer.hpp"

#include <cmath>

#include <fmt/format.h>

#include "geosched/csv.hpp"
#include "geosched/rng.hpp"

namespace geosched {

namespace {

constexpr std::uint64_t kDiagnosticStream = 0xd1a6;
constexpr std::uint64_t kEvalStream = 0xe7a1;

void validate(const TrainConfig& cfg, const DiscretisationSchedule& disc) {
  if (cfg.batch < disc.steps())
    throw std::invalid_argument(fmt::format("batch {} must be at least T = {} so every interval is costed",
                                            cfg.batch, disc.steps()));
  if (cfg.grad_steps < 1) throw std::invalid_argument("grad_steps must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(cfg.gamma >= 0.0 && cfg.gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (cfg.checkpoint_every < 1) throw std::invalid_argument("checkpoint_every must be >= 1");
}

}  // namespace

DataSource target_data(const GmmTarget& target) {
  return [target](int n, std::uint64_t seed) { return sample(target, n, seed); };
}

double sqrt_cost_rel_std(const std::vector<double>& costs) {
  if (costs.empty()) return 0.0;
  double mean = 0.0;
  for (double c : costs) mean += std::sqrt(c);
  mean /= static_cast<double>(costs.size());
  if (!(mean > 0.0)) return 0.0;
  double var = 0.0;
  for (double c : costs) var += (std::sqrt(c) - mean) * (std::sqrt(c) - mean);
  return std::sqrt(var / static_cast<double>(costs.size())) / mean;
}

Trainer::Trainer(TrainConfig cfg, DataSource data, NoiseSchedule sched, DiscretisationSchedule initial)
    : cfg_(std::move(cfg)),
      data_(std::move(data)),
      sched_(std::move(sched)),
      disc_(std::move(initial)),
      net_(std::make_shared<ScoreNetwork>(cfg_.network, derive_seed(cfg_.seed, 0x6e6574))) {
  validate(cfg_, disc_);
  adam_ = AdamState::for_parameters(net_->parameters().size());
}

Trainer::Trainer(TrainConfig cfg, DataSource data, NoiseSchedule sched, const Checkpoint& ckpt)
    : cfg_(std::move(cfg)), data_(std::move(data)), sched_(std::move(sched)) {
  if (!ckpt.training) throw std::invalid_argument("checkpoint carries no training state to resume from");
  if (ckpt.schedule_fingerprint != sched_.fingerprint())
    throw std::invalid_argument("checkpoint was trained under a different noise schedule");
  cfg_.network = ckpt.network.config();
  net_ = std::make_shared<ScoreNetwork>(ckpt.network);
  adam_ = ckpt.training->adam;
  iteration_ = ckpt.training->iteration;
  disc_ = DiscretisationSchedule(ckpt.training->schedule);
  validate(cfg_, disc_);
}

void Trainer::set_gamma(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  cfg_.gamma = gamma;
}

double Trainer::step() {
  const int steps = disc_.steps();
  const auto it = static_cast<std::uint64_t>(iteration_);
  const Points x0 = data_(cfg_.batch, derive_seed(cfg_.seed, it, 0));

  // Stratified over grid indices 1..T: every interval receives batch / T points.
  SplitMix64 rng(derive_seed(cfg_.seed, it, 1));
  const auto offset = static_cast<int>(rng() % static_cast<std::uint64_t>(steps));
  std::vector<int> interval(static_cast<std::size_t>(cfg_.batch));
  std::vector<double> times(static_cast<std::size_t>(cfg_.batch));
  for (int i = 0; i < cfg_.batch; ++i) {
    interval[i] = (i + offset) % steps;
    times[i] = disc_[interval[i] + 1];
  }
  const DsmBatch batch = noise_batch(x0, sched_, std::move(times), derive_seed(cfg_.seed, it, 2));

  for (int k = 0; k < cfg_.grad_steps; ++k) {
    const LossAndGrad lg = dsm_loss(*net_, batch);
    if (!std::isfinite(lg.loss) || !lg.grad.allFinite())
      throw NumericalError(fmt::format("non-finite DSM loss at iteration {}", iteration_));
    adam_step(*net_, lg.grad, adam_, cfg_.learning_rate);
    last_loss_ = lg.loss;
  }

  if (cfg_.gamma > 0.0) {
    std::vector<double> costs(static_cast<std::size_t>(steps), 0.0);
    if (cfg_.cost == CostKind::Corrector) {
      // Scores at the sample times and at the next grid time down, in two batched passes.
      std::vector<double> dest(batch.t.size());
      for (std::size_t i = 0; i < dest.size(); ++i) dest[i] = sched_.clamp(disc_[interval[i]]);
      const Points eps_src = net_->predict_noise(batch.x_t, batch.t);
      const Points eps_dst = net_->predict_noise(batch.x_t, dest);
      std::vector<int> counts(static_cast<std::size_t>(steps), 0);
      for (std::size_t i = 0; i < dest.size(); ++i) {
        if (dest[i] == batch.t[i]) continue;
        const auto col = static_cast<Eigen::Index>(i);
        const double v = velocity(sched_, cfg_.cost_options.velocity_at == VelocityAt::Source ? batch.t[i] : dest[i]);
        const Eigen::VectorXd s_src = eps_src.col(col) / -sigma_at(sched_, batch.t[i]);
        const Eigen::VectorXd s_dst = eps_dst.col(col) / -sigma_at(sched_, dest[i]);
        const double diff = (s_dst - s_src).squaredNorm();
        costs[interval[i]] += v * v * diff;
        ++counts[interval[i]];
      }
      for (int i = 0; i < steps; ++i) {
        if (counts[i] > 0) costs[i] /= counts[i];
      }
    } else {
      const ScoreSource src = score_source();
      for (int j = 0; j < steps; ++j) {
        std::vector<Eigen::Index> cols;
        for (std::size_t i = 0; i < interval.size(); ++i) {
          if (interval[i] == j) cols.push_back(static_cast<Eigen::Index>(i));
        }
        Points xs(batch.x_t.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) xs.col(static_cast<Eigen::Index>(c)) = batch.x_t.col(cols[c]);
        costs[j] = predictor_cost(src, disc_[j + 1], disc_[j], xs, cfg_.cost_options, derive_seed(cfg_.seed, it, 3 + j))
                       .value;
      }
    }
    try {
      disc_ = mix_schedules(disc_, update_schedule(disc_, costs, cfg_.interpolation), cfg_.gamma);
    } catch (const FlatPathError&) {
      // Nothing to equalise on this batch; keep the schedule.
    } catch (const std::invalid_argument& e) {
      throw NumericalError(fmt::format("schedule update failed at iteration {}: {}", iteration_, e.what()));
    }
  }
  ++iteration_;
  return last_loss_;
}

void Trainer::run(long until, const CheckpointHook& on_checkpoint) {
  while (iteration_ < until) {
    step();
    if (iteration_ % cfg_.checkpoint_every == 0) {
      const HistoryRecord& rec = log_diagnostics(eval_target_ ? &*eval_target_ : nullptr);
      if (on_checkpoint) on_checkpoint(*this, rec);
    }
  }
}

CostProfile Trainer::diagnostic_profile(int n_per_interval, std::uint64_t seed) const {
  const PointSampler sampler = [this](double t, int n, std::uint64_t s) {
    const Points x0 = data_(n, s);
    return noise_batch(x0, sched_, std::vector<double>(static_cast<std::size_t>(n), t), derive_seed(s, 1)).x_t;
  };
  return profile(score_source(), disc_, cfg_.cost, sampler, n_per_interval, seed, cfg_.cost_options);
}

const HistoryRecord& Trainer::log_diagnostics(const DiffusedGmm* eval_target) {
  HistoryRecord rec;
  rec.iteration = iteration_;
  rec.loss = last_loss_;
  rec.schedule = disc_.values();
  const CostProfile prof = diagnostic_profile(cfg_.diagnostic_samples, derive_seed(cfg_.seed, kDiagnosticStream));
  const LengthEnergy le = length_energy(prof.costs);
  rec.length = le.length;
  rec.energy = le.energy;
  rec.sqrt_cost_rel_std = sqrt_cost_rel_std(prof.costs);
  if (eval_target && cfg_.eval_samples > 0) {
    const ScoreSource src = score_source();
    const SamplerConfig sc{cfg_.eval_sampler, disc_, derive_seed(cfg_.seed, kEvalStream)};
    const Points xs = sample(sc, src, cfg_.eval_samples);
    rec.mean_log_likelihood = mean_log_likelihood(xs, *eval_target).mean;
    rec.score_mse = score_mse(src, *eval_target, cfg_.probe);
  }
  if (!history_.empty() && history_.back().iteration >= rec.iteration) history_.pop_back();
  history_.push_back(std::move(rec));
  return history_.back();
}

Checkpoint Trainer::checkpoint() const {
  return Checkpoint{*net_, sched_.fingerprint(), TrainingState{iteration_, adam_, disc_.values()}};
}

void write_train_history_csv(const std::filesystem::path& path, const std::vector<HistoryRecord>& history) {
  const bool metrics = !history.empty() && history.front().mean_log_likelihood.has_value();
  csv::Table table{{"iteration", "loss", "length", "energy", "sqrt_cost_rel_std"}, {}};
  if (metrics) {
    table.header.push_back("mean_log_likelihood");
    table.header.push_back("score_mse");
  }
  for (const auto& r : history) {
    std::vector<double> row{static_cast<double>(r.iteration), r.loss, r.length, r.energy, r.sqrt_cost_rel_std};
    if (metrics) {
      row.push_back(r.mean_log_likelihood.value_or(std::nan("")));
      row.push_back(r.score_mse.value_or(std::nan("")));
    }
    table.rows.push_back(std::move(row));
  }
  csv::write(path, table);
}

}  // namespace geosched
