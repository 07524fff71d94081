#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "geosched/cost_estimator.hpp"
#include "geosched/noise_schedule.hpp"

namespace geosched {

/// Raised when every incremental cost is zero, so the path has no length to equalise.
class FlatPathError : public std::runtime_error {
 public:
  FlatPathError() : std::runtime_error("flat path: all incremental costs are zero") {}
};

enum class Interpolation { MonotoneCubic, Linear };

/// Fritsch-Carlson monotone cubic Hermite interpolant (or piecewise linear).
/// Abscissae strictly increasing, ordinates nondecreasing; clamps outside the knots.
class MonotoneInterpolant {
 public:
  MonotoneInterpolant(std::vector<double> u, std::vector<double> y,
                      Interpolation kind = Interpolation::MonotoneCubic);

  double operator()(double x) const;
  const std::vector<double>& slopes() const { return m_; }

 private:
  std::vector<double> u_, y_, m_;
  Interpolation kind_;
};

/// Equalises the cumulative length: t_i* = Lambda_hat^{-1}(Lambda_hat * i / T).
/// Throws FlatPathError when all costs are zero and std::invalid_argument on
/// a length mismatch or a negative / non-finite cost.
DiscretisationSchedule update_schedule(const DiscretisationSchedule& disc, const std::vector<double>& costs,
                                       Interpolation kind = Interpolation::MonotoneCubic);

struct LengthEnergy {
  double length = 0.0;  // sum sqrt(L_i)
  double energy = 0.0;  // T * sum L_i
};
LengthEnergy length_energy(const std::vector<double>& costs);

/// gamma * target + (1 - gamma) * current, elementwise.
DiscretisationSchedule mix_schedules(const DiscretisationSchedule& current, const DiscretisationSchedule& target,
                                     double gamma);

struct OptimizeOptions {
  CostKind kind = CostKind::Corrector;
  int n_samples = 4096;
  int max_iters = 100;
  double tolerance = 1e-4;
  /// Damping of each update. Undamped updates can oscillate with period two
  /// where the cost is nearly flat (close to t = 1).
  double gamma = 0.5;
  Interpolation interpolation = Interpolation::MonotoneCubic;
  CostOptions cost_options;
};

struct OptimizeIteration {
  int iteration = 0;
  double length = 0.0;
  double energy = 0.0;
  double max_move = 0.0;
};

struct OptimizeResult {
  DiscretisationSchedule schedule;
  CostProfile last_profile;
  std::vector<OptimizeIteration> history;
  bool converged = false;
  bool flat_path = false;
};

/// Iterates profile + update_schedule against a fixed score until the largest
/// move drops below the tolerance. Every iteration reuses `seed`, so the cost
/// map is deterministic and the iteration has a true fixed point.
OptimizeResult optimize_schedule(const ScoreSource& src, const DiscretisationSchedule& initial,
                                 const PointSampler& sampler, const OptimizeOptions& opts, std::uint64_t seed);

void write_history_csv(const std::filesystem::path& path, const std::vector<OptimizeIteration>& history);

}  // namespace geosched
