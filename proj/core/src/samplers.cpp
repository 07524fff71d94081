#include "geosched/samplers.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "geosched/rng.hpp"

namespace geosched {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

using Streams = std::vector<SplitMix64>;

Streams make_streams(std::uint64_t seed, Eigen::Index n) {
  Streams s;
  s.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) s.emplace_back(derive_seed(seed, static_cast<std::uint64_t>(i)));
  return s;
}

Points gaussian(Streams& rngs, Eigen::Index dim) {
  Points out(dim, static_cast<Eigen::Index>(rngs.size()));
  for (Eigen::Index i = 0; i < out.cols(); ++i)
    for (Eigen::Index j = 0; j < dim; ++j) out(j, i) = rngs[static_cast<std::size_t>(i)].normal();
  return out;
}

void langevin_inplace(const ScoreSource& src, Points& x, double t, int n_inner, double step_scale, Streams& rngs) {
  if (n_inner < 0) throw std::invalid_argument("n_inner must be >= 0");
  if (!(step_scale > 0.0)) throw std::invalid_argument("step_scale must be positive");
  const double v = velocity(src.noise_schedule(), t);
  const double eta = step_scale * v * v;
  if (n_inner == 0 || eta == 0.0) return;
  const double noise_scale = std::sqrt(2.0 * eta);
  for (int k = 0; k < n_inner; ++k) {
    x += eta * eval_score(src, x, src.noise_schedule().clamp(t)) + noise_scale * gaussian(rngs, x.rows());
  }
}

/// Reverse-time drift of the probability-flow ODE, f x - g^2 S / 2, at the floored time.
Points flow_drift(const ScoreSource& src, const Points& x, double t) {
  const double te = src.noise_schedule().clamp(t);
  const auto [f, g] = sde_coeffs(src.noise_schedule(), te);
  return f * x - 0.5 * g * g * eval_score(src, x, te);
}

}  // namespace

std::string sampler_name(const SamplerKind& kind) {
  return std::visit(overloaded{
                        [](const ReverseSde&) { return std::string("reverse-sde"); },
                        [](const OdeEuler&) { return std::string("ode-euler"); },
                        [](const OdeHeun&) { return std::string("ode-heun"); },
                        [](const AnnealedLangevin&) { return std::string("langevin"); },
                        [](const PredictorCorrector&) { return std::string("predictor-corrector"); },
                    },
                    kind);
}

Points langevin_corrector(const ScoreSource& src, const Points& x, double t, int n_inner, double step_scale,
                          std::uint64_t seed) {
  Points out = x;
  Streams rngs = make_streams(seed, x.cols());
  langevin_inplace(src, out, t, n_inner, step_scale, rngs);
  return out;
}

Points sample(const SamplerConfig& cfg, const ScoreSource& src, int n) {
  if (n < 1) throw std::invalid_argument("sample count must be >= 1");
  const auto& disc = cfg.disc;
  if (disc.size() < 2) throw std::invalid_argument("sampler needs a discretisation schedule");
  const NoiseSchedule& sched = src.noise_schedule();
  for (std::size_t i = 0; i < disc.size(); ++i) {
    if (disc[i] < sched.t_min() && !(i == 0 && disc[i] == 0.0)) {
      throw std::invalid_argument(
          fmt::format("schedule time t_{}={} lies below t_min={}", i, disc[i], sched.t_min()));
    }
  }

  Streams rngs = make_streams(cfg.seed, n);
  Points x = gaussian(rngs, src.dim());
  if (!sched.variance_preserving()) x *= sigma_at(sched, 1.0);

  // Grid steps stop at t_min; a grid starting at 0 then ends with one noise-free
  // Euler step from t_min to 0.
  const int steps = disc.steps();
  for (int i = steps - 1; i >= 0; --i) {
    const double t_hi = disc[i + 1];
    const double t_lo = sched.clamp(disc[i]);
    const double h = t_hi - t_lo;
    std::visit(overloaded{
                   [&](const ReverseSde&) {
                     const auto [f, g] = sde_coeffs(sched, t_hi);
                     x = x - (f * x - g * g * eval_score(src, x, t_hi)) * h + g * std::sqrt(h) * gaussian(rngs, x.rows());
                   },
                   [&](const OdeEuler&) { x -= flow_drift(src, x, t_hi) * h; },
                   [&](const OdeHeun&) {
                     const Points d1 = flow_drift(src, x, t_hi);
                     const Points trial = x - d1 * h;
                     x -= 0.5 * (d1 + flow_drift(src, trial, t_lo)) * h;
                   },
                   [&](const AnnealedLangevin& k) { langevin_inplace(src, x, t_hi, k.n_inner, k.step_scale, rngs); },
                   [&](const PredictorCorrector& k) {
                     x -= flow_drift(src, x, t_hi) * h;
                     langevin_inplace(src, x, t_lo, k.n_inner, k.step_scale, rngs);
                   },
               },
               cfg.kind);
  }
  if (disc[0] < sched.t_min() && !std::holds_alternative<AnnealedLangevin>(cfg.kind)) {
    const double te = sched.t_min();
    if (std::holds_alternative<ReverseSde>(cfg.kind)) {
      const auto [f, g] = sde_coeffs(sched, te);
      x -= (f * x - g * g * eval_score(src, x, te)) * te;
    } else {
      x -= flow_drift(src, x, te) * te;
    }
  }
  return x;
}

}  // namespace geosched
