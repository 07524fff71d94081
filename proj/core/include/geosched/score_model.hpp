#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>

#include <Eigen/Core>

#include "geosched/noise_schedule.hpp"
#include "geosched/score_network.hpp"
#include "geosched/target_oracle.hpp"

namespace geosched {

struct OracleScore {
  DiffusedGmm target;
};

struct LearnedScore {
  std::shared_ptr<const ScoreNetwork> net;
  NoiseSchedule sched;
};

/// Either the exact score of an analytic diffusion path or a trained network.
class ScoreSource {
 public:
  explicit ScoreSource(OracleScore oracle) : impl_(std::move(oracle)) {}
  explicit ScoreSource(LearnedScore learned);

  static ScoreSource oracle(DiffusedGmm target) { return ScoreSource(OracleScore{std::move(target)}); }
  static ScoreSource learned(std::shared_ptr<const ScoreNetwork> net, NoiseSchedule sched) {
    return ScoreSource(LearnedScore{std::move(net), std::move(sched)});
  }

  int dim() const;
  const NoiseSchedule& noise_schedule() const;
  bool is_oracle() const { return std::holds_alternative<OracleScore>(impl_); }
  /// The analytic path, or nullptr for a learned source.
  const DiffusedGmm* target() const;
  const ScoreNetwork* network() const;

 private:
  std::variant<OracleScore, LearnedScore> impl_;
};

/// Score at every column of xs. Throws std::domain_error for t outside [t_min, 1].
Points eval_score(const ScoreSource& src, const Points& xs, double t);

/// Forward-noised training batch: x_t = s(t) x_0 + sigma(t) eps.
struct DsmBatch {
  Points x_t;
  Points noise;
  std::vector<double> t;
};

/// Each sample gets its own t drawn uniformly from `times` (floored at t_min)
/// and its own noise, both from streams keyed by (seed, sample index).
DsmBatch make_dsm_batch(const Points& x0, const NoiseSchedule& sched, std::span<const double> times,
                        std::uint64_t seed);
/// As above with the time of every sample given explicitly.
DsmBatch noise_batch(const Points& x0, const NoiseSchedule& sched, std::vector<double> sample_times,
                     std::uint64_t seed);

/// sigma(t)^2-weighted DSM objective mean ||sigma(t) s(x_t, t) + eps||^2 for any source.
double dsm_objective(const ScoreSource& src, const DsmBatch& batch);

struct LossAndGrad {
  double loss = 0.0;
  Eigen::VectorXd grad;
};

/// Loss and exact parameter gradient for a network on a freshly noised batch.
LossAndGrad dsm_loss(const ScoreNetwork& net, const Points& x0, const NoiseSchedule& sched,
                     std::span<const double> times, std::uint64_t seed);
LossAndGrad dsm_loss(const ScoreNetwork& net, const DsmBatch& batch);

struct HutchinsonOptions {
  int probes = 5;
  /// Directional difference step for v^T J v.
  double inner_h = 1e-3;
  /// Spatial gradient step is outer_h * (1 + |x|).
  double outer_h = 1e-3;
  /// Oracle sources use exact derivatives: zero for a single Gaussian, the exact third derivative in 1-D.
  bool exact_oracle = true;
};

struct TraceGradEstimate {
  Points mean;       // dim x n
  Points std_error;  // dim x n, standard error of the probe average
};

/// Probe-averaged estimate of grad_x Tr(grad_x score(x, t)) at each column of xs
/// from Gaussian probes; probe streams are keyed by (seed, column).
TraceGradEstimate hutchinson_trace_grad(const ScoreSource& src, const Points& xs, double t,
                                        const HutchinsonOptions& opts, std::uint64_t seed);

}  // namespace geosched
