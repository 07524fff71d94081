#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "geosched/noise_schedule.hpp"
#include "geosched/score_model.hpp"

namespace geosched {

struct ReverseSde {};
struct OdeEuler {};
struct OdeHeun {};
/// Langevin steps at every grid time with no transport in between.
struct AnnealedLangevin {
  int n_inner = 1;
  double step_scale = 0.1;
};
/// Euler probability-flow step followed by Langevin steps at the destination.
struct PredictorCorrector {
  int n_inner = 1;
  double step_scale = 0.1;
};

using SamplerKind = std::variant<ReverseSde, OdeEuler, OdeHeun, AnnealedLangevin, PredictorCorrector>;

std::string sampler_name(const SamplerKind& kind);

struct SamplerConfig {
  SamplerKind kind = ReverseSde{};
  DiscretisationSchedule disc;
  std::uint64_t seed = 0;
};

/// Simulates n chains backward through cfg.disc, starting from N(0, I) for VP
/// families and N(0, sigma(1)^2 I) for VE. Chain i draws all its randomness from
/// its own stream, so results do not depend on n or on how chains are split.
/// Grid steps run down to max(t_0, t_min); when t_0 = 0 a final noise-free
/// Euler step with the score at t_min moves from t_min to 0.
/// Throws std::invalid_argument if any grid time other than t_0 = 0 lies below t_min.
Points sample(const SamplerConfig& cfg, const ScoreSource& src, int n);

/// n_inner steps of x <- x + eta S(x, t) + sqrt(2 eta) xi, eta = step_scale v(t)^2.
Points langevin_corrector(const ScoreSource& src, const Points& x, double t, int n_inner, double step_scale,
                          std::uint64_t seed);

}  // namespace geosched
