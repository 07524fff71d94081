#include "geosched/target_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "geosched/rng.hpp"

namespace geosched {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// log w_k + log N(x; m_k, v_k) for every component.
void component_log_terms(const GmmTarget& target, const double* x, std::vector<double>& out) {
  const int d = target.dim();
  out.resize(target.size());
  for (std::size_t k = 0; k < target.size(); ++k) {
    const auto& c = target.components()[k];
    double acc = std::log(c.weight);
    for (int j = 0; j < d; ++j) {
      const double diff = x[j] - c.mean[j];
      acc -= 0.5 * (kLog2Pi + std::log(c.variance[j]) + diff * diff / c.variance[j]);
    }
    out[k] = acc;
  }
}

/// Normalises log terms into responsibilities in place and returns the log-sum-exp.
double softmax_inplace(std::vector<double>& terms) {
  const double mx = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double& v : terms) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : terms) v /= sum;
  return mx + std::log(sum);
}

}  // namespace

GmmTarget::GmmTarget(std::vector<GaussianComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = static_cast<int>(components_.front().mean.size());
  if (dim_ < 1) throw std::invalid_argument("mixture dimension must be positive");
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.size() != dim_ || c.variance.size() != dim_)
      throw std::invalid_argument("mixture components disagree on dimension");
    if (!(c.weight > 0.0)) throw std::invalid_argument("mixture weights must be positive");
    if (!((c.variance.array() > 0.0).all())) throw std::invalid_argument("mixture variances must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("mixture weights must sum to 1");
}

GmmTarget gaussian_target(double mean, double variance) {
  return GmmTarget({{1.0, Eigen::VectorXd::Constant(1, mean), Eigen::VectorXd::Constant(1, variance)}});
}

GmmTarget standard_normal_target(int dim) {
  return GmmTarget({{1.0, Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)}});
}

GmmTarget bimodal_target(double separation, double std) {
  const double var = std * std;
  return GmmTarget({{0.5, Eigen::VectorXd::Constant(1, -separation), Eigen::VectorXd::Constant(1, var)},
                    {0.5, Eigen::VectorXd::Constant(1, separation), Eigen::VectorXd::Constant(1, var)}});
}

GmmTarget cantor_target(int level, double mollify_t, const NoiseSchedule& sched) {
  if (level < 1 || level > 20) throw std::invalid_argument("Cantor level must lie in [1, 20]");
  if (!(mollify_t >= sched.t_min()) || mollify_t > 0.01)
    throw std::invalid_argument("Cantor mollification time must lie in [t_min, 0.01]");
  const auto [s, sigma] = kernel_params(sched, mollify_t);
  const std::size_t n = std::size_t{1} << level;
  const double width = std::pow(3.0, -level);
  std::vector<GaussianComponent> comps;
  comps.reserve(n);
  for (std::size_t code = 0; code < n; ++code) {
    // Bits of `code` pick the left (0) or right (1) third at each level, most significant first.
    double left = 0.0;
    double scale = 1.0;
    for (int j = level - 1; j >= 0; --j) {
      scale /= 3.0;
      if ((code >> j) & 1U) left += 2.0 * scale;
    }
    const double centre = left + 0.5 * width;
    comps.push_back({1.0 / static_cast<double>(n), Eigen::VectorXd::Constant(1, s * centre),
                     Eigen::VectorXd::Constant(1, sigma * sigma)});
  }
  return GmmTarget(std::move(comps));
}

GmmTarget DiffusedGmm::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("diffusion time outside [0, 1]");
  const auto [s, sigma] = kernel_params(sched_, t);
  std::vector<GaussianComponent> comps;
  comps.reserve(base_.size());
  for (const auto& c : base_.components()) {
    comps.push_back({c.weight, s * c.mean, (s * s) * c.variance.array() + sigma * sigma});
  }
  return GmmTarget(std::move(comps));
}

double log_density(const GmmTarget& target, const Eigen::VectorXd& x) {
  if (x.size() != target.dim()) throw std::invalid_argument("point dimension mismatch");
  std::vector<double> terms;
  component_log_terms(target, x.data(), terms);
  return softmax_inplace(terms);
}

double log_density(const DiffusedGmm& target, const Eigen::VectorXd& x, double t) {
  return log_density(target.at(t), x);
}

Eigen::VectorXd log_density(const DiffusedGmm& target, const Points& xs, double t) {
  const GmmTarget pt = target.at(t);
  if (xs.rows() != pt.dim()) throw std::invalid_argument("point dimension mismatch");
  Eigen::VectorXd out(xs.cols());
  std::vector<double> terms;
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    component_log_terms(pt, xs.col(i).data(), terms);
    out[i] = softmax_inplace(terms);
  }
  return out;
}

Points score(const GmmTarget& target, const Points& xs) {
  if (xs.rows() != target.dim()) throw std::invalid_argument("point dimension mismatch");
  const int d = target.dim();
  Points out = Points::Zero(d, xs.cols());
  std::vector<double> r;
  for (Eigen::Index i = 0; i < xs.cols(); ++i) {
    const double* x = xs.col(i).data();
    component_log_terms(target, x, r);
    softmax_inplace(r);
    for (std::size_t k = 0; k < target.size(); ++k) {
      const auto& c = target.components()[k];
      for (int j = 0; j < d; ++j) out(j, i) += r[k] * (c.mean[j] - x[j]) / c.variance[j];
    }
  }
  return out;
}

Points score(const DiffusedGmm& target, const Points& xs, double t) { return score(target.at(t), xs); }

double score_derivative_1d(const GmmTarget& target, double x, int order) {
  if (target.dim() != 1) throw std::invalid_argument("score_derivative_1d requires a one-dimensional target");
  if (order != 2 && order != 3) throw std::invalid_argument("score_derivative_1d supports orders 2 and 3");
  std::vector<double> r;
  component_log_terms(target, &x, r);
  softmax_inplace(r);
  const auto& comps = target.components();
  // With a_k the component scores, d2 = Var_r(a) + E_r[a'] and
  // d3 = kappa3_r(a) + 3 Cov_r(a, a'). Centred sums keep a single Gaussian at exactly 0.
  double m1 = 0.0;
  double mean_slope = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    m1 += r[k] * (comps[k].mean[0] - x) / comps[k].variance[0];
    mean_slope += r[k] * (-1.0 / comps[k].variance[0]);
  }
  double var = 0.0;
  double third = 0.0;
  double cov = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const double c = (comps[k].mean[0] - x) / comps[k].variance[0] - m1;
    const double slope_dev = -1.0 / comps[k].variance[0] - mean_slope;
    var += r[k] * c * c;
    third += r[k] * c * c * c;
    cov += r[k] * c * slope_dev;
  }
  return order == 2 ? var + mean_slope : third + 3.0 * cov;
}

double score_derivative_1d(const DiffusedGmm& target, double x, double t, int order) {
  return score_derivative_1d(target.at(t), x, order);
}

Points sample(const GmmTarget& target, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample size must be >= 1");
  const int d = target.dim();
  std::vector<double> cumulative(target.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < target.size(); ++k) cumulative[k] = (acc += target.components()[k].weight);
  cumulative.back() = 1.0;

  Points out(d, n);
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const auto k = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    const auto& c = target.components()[std::min(k, target.size() - 1)];
    for (int j = 0; j < d; ++j) out(j, i) = c.mean[j] + std::sqrt(c.variance[j]) * rng.normal();
  }
  return out;
}

Points sample(const DiffusedGmm& target, int n, double t, std::uint64_t seed) {
  return sample(target.at(t), n, seed);
}

double cdf_1d(const GmmTarget& target, double x) {
  if (target.dim() != 1) throw std::invalid_argument("cdf_1d requires a one-dimensional target");
  double acc = 0.0;
  for (const auto& c : target.components()) {
    acc += c.weight * 0.5 * std::erfc(-(x - c.mean[0]) / std::sqrt(2.0 * c.variance[0]));
  }
  return acc;
}

double quantile_1d(const GmmTarget& target, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : target.components()) {
    const double sd = std::sqrt(c.variance[0]);
    lo = std::min(lo, c.mean[0] - 40.0 * sd);
    hi = std::max(hi, c.mean[0] + 40.0 * sd);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (cdf_1d(target, mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace geosched
