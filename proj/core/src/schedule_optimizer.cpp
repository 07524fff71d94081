#include "geosched/schedule_optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "geosched/csv.hpp"

namespace geosched {

MonotoneInterpolant::MonotoneInterpolant(std::vector<double> u, std::vector<double> y, Interpolation kind)
    : u_(std::move(u)), y_(std::move(y)), kind_(kind) {
  const std::size_t n = u_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("interpolant needs at least two matching knots");
  for (std::size_t j = 1; j < n; ++j) {
    if (!(u_[j] > u_[j - 1])) throw std::invalid_argument("interpolant abscissae must be strictly increasing");
    if (y_[j] < y_[j - 1]) throw std::invalid_argument("interpolant ordinates must be nondecreasing");
  }
  std::vector<double> secant(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) secant[j] = (y_[j + 1] - y_[j]) / (u_[j + 1] - u_[j]);

  m_.assign(n, 0.0);
  m_.front() = secant.front();
  m_.back() = secant.back();
  for (std::size_t j = 1; j + 1 < n; ++j) {
    m_[j] = secant[j - 1] * secant[j] <= 0.0 ? 0.0 : 0.5 * (secant[j - 1] + secant[j]);
  }
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (secant[j] == 0.0) {
      m_[j] = 0.0;
      m_[j + 1] = 0.0;
      continue;
    }
    const double a = m_[j] / secant[j];
    const double b = m_[j + 1] / secant[j];
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      m_[j] = tau * a * secant[j];
      m_[j + 1] = tau * b * secant[j];
    }
  }
}

double MonotoneInterpolant::operator()(double x) const {
  if (!(x > u_.front())) return y_.front();
  if (!(x < u_.back())) return y_.back();
  const auto j = static_cast<std::size_t>(std::upper_bound(u_.begin(), u_.end(), x) - u_.begin()) - 1;
  const double h = u_[j + 1] - u_[j];
  const double s = (x - u_[j]) / h;
  if (kind_ == Interpolation::Linear) return y_[j] + s * (y_[j + 1] - y_[j]);
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y_[j] + (s3 - 2 * s2 + s) * h * m_[j] + (-2 * s3 + 3 * s2) * y_[j + 1] +
         (s3 - s2) * h * m_[j + 1];
}

DiscretisationSchedule update_schedule(const DiscretisationSchedule& disc, const std::vector<double>& costs,
                                       Interpolation kind) {
  const int steps = disc.steps();
  if (static_cast<int>(costs.size()) != steps) {
    throw std::invalid_argument(fmt::format("expected {} costs, got {}", steps, costs.size()));
  }
  std::vector<double> lambda(steps + 1, 0.0);
  for (int i = 0; i < steps; ++i) {
    if (!(costs[i] >= 0.0) || !std::isfinite(costs[i]))
      throw std::invalid_argument(fmt::format("cost {} is {}, expected a finite nonnegative value", i, costs[i]));
    lambda[i + 1] = lambda[i] + std::sqrt(costs[i]);
  }
  const double total = lambda.back();
  if (!(total > 0.0)) throw FlatPathError();

  // Zero-cost intervals repeat an abscissa. Keep the first knot of each run,
  // except for the run reaching the final time, which keeps t_T.
  std::vector<double> u;
  std::vector<double> y;
  for (int i = 0; i <= steps; ++i) {
    if (!u.empty() && lambda[i] == u.back()) {
      if (i == steps) y.back() = disc[i];
      continue;
    }
    u.push_back(lambda[i]);
    y.push_back(disc[i]);
  }

  const MonotoneInterpolant inverse(std::move(u), std::move(y), kind);
  std::vector<double> out(steps + 1);
  out.front() = disc[0];
  out.back() = disc[steps];
  for (int i = 1; i < steps; ++i) out[i] = inverse(total * i / steps);
  return DiscretisationSchedule(std::move(out));
}

LengthEnergy length_energy(const std::vector<double>& costs) {
  LengthEnergy le;
  double sum = 0.0;
  for (double c : costs) {
    le.length += std::sqrt(c);
    sum += c;
  }
  le.energy = static_cast<double>(costs.size()) * sum;
  return le;
}

DiscretisationSchedule mix_schedules(const DiscretisationSchedule& current, const DiscretisationSchedule& target,
                                     double gamma) {
  if (current.size() != target.size()) throw std::invalid_argument("schedules differ in length");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("mixing weight must lie in [0, 1]");
  if (current[0] != target[0]) throw std::invalid_argument("schedules differ at t_0");
  if (gamma == 0.0) return current;
  if (gamma == 1.0) return target;
  std::vector<double> out(current.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = gamma * target[i] + (1.0 - gamma) * current[i];
  out.front() = current[0];
  out.back() = 1.0;
  return DiscretisationSchedule(std::move(out));
}

OptimizeResult optimize_schedule(const ScoreSource& src, const DiscretisationSchedule& initial,
                                 const PointSampler& sampler, const OptimizeOptions& opts, std::uint64_t seed) {
  if (opts.max_iters < 1) throw std::invalid_argument("optimisation needs max_iters >= 1");
  OptimizeResult result;
  result.schedule = initial;
  for (int it = 1; it <= opts.max_iters; ++it) {
    result.last_profile = profile(src, result.schedule, opts.kind, sampler, opts.n_samples, seed, opts.cost_options);
    const LengthEnergy le = length_energy(result.last_profile.costs);
    DiscretisationSchedule next;
    try {
      next = mix_schedules(result.schedule, update_schedule(result.schedule, result.last_profile.costs,
                                                            opts.interpolation),
                           opts.gamma);
    } catch (const FlatPathError&) {
      result.flat_path = true;
      result.history.push_back({it, le.length, le.energy, 0.0});
      return result;
    }
    double move = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) move = std::max(move, std::abs(next[i] - result.schedule[i]));
    result.history.push_back({it, le.length, le.energy, move});
    result.schedule = std::move(next);
    if (move < opts.tolerance) {
      result.converged = true;
      result.last_profile = profile(src, result.schedule, opts.kind, sampler, opts.n_samples, seed, opts.cost_options);
      break;
    }
  }
  return result;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<OptimizeIteration>& history) {
  csv::Table table{{"iteration", "length", "energy", "max_move"}, {}};
  for (const auto& h : history) table.rows.push_back({static_cast<double>(h.iteration), h.length, h.energy, h.max_move});
  csv::write(path, table);
}

}  // namespace geosched
