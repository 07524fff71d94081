#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "geosched/noise_schedule.hpp"

namespace geosched {

/// A batch of points, one per column (dim x n).
using Points = Eigen::MatrixXd;

struct GaussianComponent {
  double weight;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;  // diagonal
};

/// Finite mixture of axis-aligned Gaussians.
class GmmTarget {
 public:
  explicit GmmTarget(std::vector<GaussianComponent> components);

  int dim() const { return dim_; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  std::size_t size() const { return components_.size(); }

 private:
  std::vector<GaussianComponent> components_;
  int dim_ = 0;
};

GmmTarget gaussian_target(double mean, double variance);
GmmTarget standard_normal_target(int dim = 1);
/// Equal-weight pair at -separation and +separation with a shared std.
GmmTarget bimodal_target(double separation = 6.0, double std = 0.1);

/// Level-`level` Cantor construction on [0, 1] (2^level interval centres),
/// mollified by the forward diffusion run for `mollify_t`.
GmmTarget cantor_target(int level, double mollify_t, const NoiseSchedule& sched);

/// The diffusion path p_t of a mixture: component k at time t is
/// N(s(t) mu_k, s(t)^2 tau_k^2 + sigma(t)^2).
class DiffusedGmm {
 public:
  DiffusedGmm(GmmTarget base, NoiseSchedule sched) : base_(std::move(base)), sched_(std::move(sched)) {}

  const GmmTarget& base() const { return base_; }
  const NoiseSchedule& noise_schedule() const { return sched_; }
  int dim() const { return base_.dim(); }

  /// Marginal mixture at time t.
  GmmTarget at(double t) const;

 private:
  GmmTarget base_;
  NoiseSchedule sched_;
};

double log_density(const DiffusedGmm& target, const Eigen::VectorXd& x, double t);
Eigen::VectorXd log_density(const DiffusedGmm& target, const Points& xs, double t);
double log_density(const GmmTarget& target, const Eigen::VectorXd& x);

Points score(const DiffusedGmm& target, const Points& xs, double t);
Points score(const GmmTarget& target, const Points& xs);

/// Exact second (order 2) or third (order 3) x-derivative of log p_t in one
/// dimension. Throws std::invalid_argument for other orders or dim != 1.
double score_derivative_1d(const DiffusedGmm& target, double x, double t, int order);
double score_derivative_1d(const GmmTarget& target, double x, int order);

/// i.i.d. draws: component by weight, then a Gaussian draw.
Points sample(const GmmTarget& target, int n, std::uint64_t seed);
Points sample(const DiffusedGmm& target, int n, double t, std::uint64_t seed);

/// Quantile function of a one-dimensional mixture (bisection on the CDF).
double quantile_1d(const GmmTarget& target, double p);
double cdf_1d(const GmmTarget& target, double x);

}  // namespace geosched
