#include "geosched/cost_estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "geosched/csv.hpp"
#include "geosched/rng.hpp"

namespace geosched {

namespace {

IncrementalCost summarise(const Eigen::RowVectorXd& per_sample, double weight) {
  const auto n = static_cast<double>(per_sample.size());
  const double mean = per_sample.mean();
  double var = 0.0;
  if (per_sample.size() > 1) var = (per_sample.array() - mean).square().sum() / (n - 1.0);
  return {weight * mean, weight * std::sqrt(var / n), 0.0};
}

/// (S(x + h u) - S(x - h u)) / (2h) per column with u normalised per column.
Points directional_derivative(const ScoreSource& src, const Points& xs, const Points& dirs, double t, double h) {
  const Eigen::RowVectorXd norms = dirs.colwise().norm();
  Points unit = dirs;
  for (Eigen::Index i = 0; i < dirs.cols(); ++i) {
    if (norms[i] > 0.0) unit.col(i) /= norms[i];
  }
  Points out = (eval_score(src, xs + h * unit, t) - eval_score(src, xs - h * unit, t)) / (2.0 * h);
  return out.array().rowwise() * norms.array();
}

/// Squared norms of `diff`, zeroed where the difference is within rounding of
/// the terms it was formed from (`scale` holds the sum of their norms).
Eigen::RowVectorXd squared_norms_above_rounding(const Points& diff, const Eigen::RowVectorXd& scale) {
  constexpr double kUlps = 64.0 * std::numeric_limits<double>::epsilon();
  Eigen::RowVectorXd out = diff.colwise().squaredNorm();
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double floor = kUlps * scale[i];
    if (out[i] <= floor * floor) out[i] = 0.0;
  }
  return out;
}

}  // namespace

IncrementalCost corrector_cost(const ScoreSource& src, double t, double t_dest, const Points& xs, VelocityAt at) {
  if (xs.cols() == 0) throw std::invalid_argument("corrector cost needs samples");
  const NoiseSchedule& sched = src.noise_schedule();
  const double te = sched.clamp(t);
  const double td = sched.clamp(t_dest);
  if (te == td) return {};
  const Points s_dst = eval_score(src, xs, td);
  const Points s_src = eval_score(src, xs, te);
  const Eigen::RowVectorXd scale = s_dst.colwise().norm() + s_src.colwise().norm();
  const double v = velocity(sched, at == VelocityAt::Source ? te : td);
  return summarise(squared_norms_above_rounding(s_dst - s_src, scale), v * v);
}

IncrementalCost predictor_cost(const ScoreSource& src, double t, double t_dest, const Points& xs,
                               const CostOptions& opts, std::uint64_t seed) {
  if (xs.cols() == 0) throw std::invalid_argument("predictor cost needs samples");
  const NoiseSchedule& sched = src.noise_schedule();
  const double te = sched.clamp(t);
  const double td = sched.clamp(t_dest);
  const double dt = t_dest - t;
  if (dt == 0.0) return {};
  const Eigen::Index d = xs.rows();
  const Eigen::Index n = xs.cols();
  const auto [f, g] = sde_coeffs(sched, te);
  const double g2 = g * g;
  const bool exact = src.target() && d == 1;

  const Points s0 = eval_score(src, xs, te);
  const Points mapped = xs + (f * xs - 0.5 * g2 * s0) * dt;
  const Points s1 = eval_score(src, mapped, td);

  // Hessian of log p_t applied to s1, and its trace.
  Points hess_s1(d, n);
  Eigen::RowVectorXd trace(n);
  if (exact) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d2 = score_derivative_1d(*src.target(), xs(0, i), te, 2);
      hess_s1(0, i) = d2 * s1(0, i);
      trace[i] = d2;
    }
  } else {
    hess_s1 = directional_derivative(src, xs, s1, te, opts.jacobian_h);
    trace.setZero();
    for (Eigen::Index j = 0; j < d; ++j) {
      Points e = Points::Zero(d, n);
      e.row(j).setOnes();
      trace += directional_derivative(src, xs, e, te, opts.jacobian_h).row(j);
    }
  }

  const TraceGradEstimate tg = hutchinson_trace_grad(src, xs, te, opts.hutchinson, seed);
  const Points grad_log_g = s1 + dt * (f * s1 - 0.5 * g2 * hess_s1) - s0 - 0.5 * dt * g2 * tg.mean;

  Eigen::Index violations = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (dt * (static_cast<double>(d) * f - 0.5 * g2 * trace[i]) >= 1.0) ++violations;
  }
  const double v = velocity(sched, opts.velocity_at == VelocityAt::Source ? te : td);
  const Eigen::RowVectorXd scale =
      s1.colwise().norm() + s0.colwise().norm() +
      std::abs(dt) * (std::abs(f) * s1.colwise().norm() + 0.5 * g2 * hess_s1.colwise().norm() +
                      0.5 * g2 * tg.mean.colwise().norm());
  IncrementalCost out = summarise(squared_norms_above_rounding(grad_log_g, scale), v * v);
  out.violation_fraction = static_cast<double>(violations) / static_cast<double>(n);
  return out;
}

PointSampler oracle_sampler(const DiffusedGmm& target) {
  return [target](double t, int n, std::uint64_t seed) { return sample(target, n, t, seed); };
}

PointSampler data_sampler(Points data, NoiseSchedule sched) {
  if (data.cols() == 0) throw std::invalid_argument("data sampler needs data");
  return [data = std::move(data), sched = std::move(sched)](double t, int n, std::uint64_t seed) {
    const auto [s, sigma] = kernel_params(sched, sched.clamp(t));
    SplitMix64 rng(seed);
    Points out(data.rows(), n);
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(data.cols()));
      for (Eigen::Index j = 0; j < data.rows(); ++j) out(j, i) = s * data(j, k) + sigma * rng.normal();
    }
    return out;
  };
}

std::vector<double> CostProfile::cumulative_length() const {
  std::vector<double> out(costs.size() + 1, 0.0);
  for (std::size_t i = 0; i < costs.size(); ++i) out[i + 1] = out[i] + std::sqrt(costs[i]);
  return out;
}

double CostProfile::length() const { return cumulative_length().back(); }

double CostProfile::energy() const {
  double total = 0.0;
  for (double c : costs) total += c;
  return static_cast<double>(costs.size()) * total;
}

CostProfile profile(const ScoreSource& src, const DiscretisationSchedule& disc, CostKind kind,
                    const PointSampler& sampler, int n_samples, std::uint64_t seed, const CostOptions& opts) {
  if (n_samples < 1) throw std::invalid_argument("profile needs n_samples >= 1");
  const int steps = disc.steps();
  CostProfile out{disc, std::vector<double>(steps), std::vector<double>(steps), n_samples, kind, 0.0};
  double violations = 0.0;
  for (int i = 0; i < steps; ++i) {
    const double t_src = disc[i + 1];
    const double t_dst = disc[i];
    const Points xs = sampler(src.noise_schedule().clamp(t_src), n_samples, derive_seed(seed, i, 0));
    const IncrementalCost c = kind == CostKind::Corrector
                                  ? corrector_cost(src, t_src, t_dst, xs, opts.velocity_at)
                                  : predictor_cost(src, t_src, t_dst, xs, opts, derive_seed(seed, i, 1));
    out.costs[i] = c.value;
    out.std_errors[i] = c.std_error;
    violations += c.violation_fraction;
  }
  out.violation_fraction = violations / steps;
  return out;
}

CostProfile profile(const ScoreSource& src, const DiscretisationSchedule& disc, CostKind kind, int n_samples,
                    std::uint64_t seed, const CostOptions& opts) {
  if (!src.target()) throw std::invalid_argument("profile without a sampler requires an oracle source");
  return profile(src, disc, kind, oracle_sampler(*src.target()), n_samples, seed, opts);
}

void write_profile_csv(const std::filesystem::path& path, const CostProfile& prof) {
  csv::Table table{{"i", "t_i", "t_i+1", "L", "sqrtL", "Lambda_cum"}, {}};
  const auto cum = prof.cumulative_length();
  for (std::size_t i = 0; i < prof.costs.size(); ++i) {
    table.rows.push_back({static_cast<double>(i), prof.schedule[i], prof.schedule[i + 1], prof.costs[i],
                          std::sqrt(prof.costs[i]), cum[i + 1]});
  }
  csv::write(path, table);
}

LocalCost local_cost(const ScoreSource& src, double t, const std::vector<double>& dts, CostKind kind,
                     const PointSampler& sampler, int n_samples, std::uint64_t seed, const CostOptions& opts) {
  if (dts.empty()) throw std::invalid_argument("local cost needs at least one step");
  for (std::size_t k = 0; k < dts.size(); ++k) {
    if (!(dts[k] > 0.0) || (k > 0 && !(dts[k] < dts[k - 1])))
      throw std::invalid_argument("local cost steps must be positive and decreasing");
  }
  LocalCost out;
  for (double h : dts) {
    const Points xs = sampler(t + h, n_samples, seed);
    const IncrementalCost c = kind == CostKind::Corrector ? corrector_cost(src, t + h, t, xs, opts.velocity_at)
                                                          : predictor_cost(src, t + h, t, xs, opts, seed);
    out.ratios.push_back(c.value / (h * h));
  }
  out.extrapolated = out.ratios.back();
  if (dts.size() > 1) {
    const double h1 = dts[dts.size() - 2];
    const double h2 = dts.back();
    const double r1 = out.ratios[out.ratios.size() - 2];
    const double r2 = out.ratios.back();
    out.extrapolated = r2 + (r2 - r1) * h2 / (h1 - h2);
  }
  return out;
}

}  // namespace geosched
