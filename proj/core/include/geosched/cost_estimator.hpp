#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <vector>

#include "geosched/noise_schedule.hpp"
#include "geosched/score_model.hpp"

namespace geosched {

enum class CostKind { Corrector, Predictor };

struct IncrementalCost {
  double value = 0.0;
  double std_error = 0.0;
  /// Fraction of samples failing the Euler-map trace condition (predictor only).
  double violation_fraction = 0.0;
};

/// Time at which the corrector speed v = sigma is evaluated for an interval.
enum class VelocityAt { Source, Destination };

/// v^2 mean ||S(x, t') - S(x, t)||^2 over xs ~ p_t, moving from `t` to `t' = t_dest`.
/// Times below t_min are evaluated at t_min. Per-sample differences within a
/// few ulps of the scores count as zero, so stationary paths cost exactly 0.
IncrementalCost corrector_cost(const ScoreSource& src, double t, double t_dest, const Points& xs,
                               VelocityAt at = VelocityAt::Source);

struct CostOptions {
  VelocityAt velocity_at = VelocityAt::Source;
  HutchinsonOptions hutchinson;
  /// Step for directional differences of the score when no exact derivative exists.
  double jacobian_h = 1e-3;
};

/// v^2 mean ||grad log G(x)||^2 over xs ~ p_t, where G is the residual
/// weight after transporting with one Euler step of the probability-flow ODE.
IncrementalCost predictor_cost(const ScoreSource& src, double t, double t_dest, const Points& xs,
                               const CostOptions& opts, std::uint64_t seed);

/// Draws n points from p_t.
using PointSampler = std::function<Points(double t, int n, std::uint64_t seed)>;

/// Exact draws from the diffusion path of an oracle source.
PointSampler oracle_sampler(const DiffusedGmm& target);
/// Forward-noises a fixed data set, cycling through it deterministically.
PointSampler data_sampler(Points data, NoiseSchedule sched);

struct CostProfile {
  DiscretisationSchedule schedule;
  std::vector<double> costs;  // costs[i] for the interval [t_i, t_{i+1}]
  std::vector<double> std_errors;
  int n_samples = 0;
  CostKind estimator = CostKind::Corrector;
  double violation_fraction = 0.0;

  /// Lambda_hat(t_i) = sum_{j<i} sqrt(L_j), length T + 1.
  std::vector<double> cumulative_length() const;
  double length() const;
  /// T * sum L.
  double energy() const;
};

/// For every interval draws x ~ p_{t_{i+1}} and estimates the cost of moving
/// to t_i. Interval streams are keyed by (seed, i).
CostProfile profile(const ScoreSource& src, const DiscretisationSchedule& disc, CostKind kind,
                    const PointSampler& sampler, int n_samples, std::uint64_t seed, const CostOptions& opts = {});
/// Oracle sources sample their own path.
CostProfile profile(const ScoreSource& src, const DiscretisationSchedule& disc, CostKind kind, int n_samples,
                    std::uint64_t seed, const CostOptions& opts = {});

/// CSV with columns i, t_i, t_{i+1}, L, sqrtL, Lambda_cum.
void write_profile_csv(const std::filesystem::path& path, const CostProfile& prof);

struct LocalCost {
  std::vector<double> ratios;  // L(t, t + dt_k) / dt_k^2
  double extrapolated = 0.0;
};

/// Ratio estimates of delta(t) over decreasing steps (common random numbers
/// across steps) and their linear Richardson extrapolation to a zero step.
LocalCost local_cost(const ScoreSource& src, double t, const std::vector<double>& dts, CostKind kind,
                     const PointSampler& sampler, int n_samples, std::uint64_t seed,
                     const CostOptions& opts = {});

}  // namespace geosched
