#include "geosched/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "geosched/csv.hpp"
#include "geosched/rng.hpp"

namespace geosched {

namespace {

std::span<const double> one_dimensional(const Points& samples, const char* what) {
  if (samples.rows() != 1) throw std::invalid_argument(fmt::format("{} supports one-dimensional samples only", what));
  return {samples.data(), static_cast<std::size_t>(samples.cols())};
}

}  // namespace

DensityCurve histogram_density(std::span<const double> samples, double lo, double hi, double bin_width,
                               double smoothing_bins) {
  if (!(hi > lo) || !(bin_width > 0.0)) throw std::invalid_argument("invalid histogram range");
  const auto bins = static_cast<std::size_t>(std::ceil((hi - lo) / bin_width));
  std::vector<double> counts(bins, 0.0);
  for (double x : samples) {
    if (!(x >= lo && x < hi)) continue;
    auto k = static_cast<std::size_t>((x - lo) / bin_width);
    counts[std::min(k, bins - 1)] += 1.0;
  }
  if (smoothing_bins > 0.0) {
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(4.0 * smoothing_bins));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const double z = static_cast<double>(k) / smoothing_bins;
      norm += kernel[k + radius] = std::exp(-0.5 * z * z);
    }
    for (double& w : kernel) w /= norm;
    std::vector<double> smooth(bins, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(bins);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (counts[i] == 0.0) continue;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        if (i + k >= 0 && i + k < n) smooth[i + k] += counts[i] * kernel[k + radius];
      }
    }
    counts = std::move(smooth);
  }
  DensityCurve curve;
  const double scale = samples.empty() ? 0.0 : 1.0 / (static_cast<double>(samples.size()) * bin_width);
  for (std::size_t k = 0; k < bins; ++k) {
    curve.x.push_back(lo + (static_cast<double>(k) + 0.5) * bin_width);
    curve.density.push_back(counts[k] * scale);
  }
  return curve;
}

std::vector<double> find_peaks(const DensityCurve& curve, double min_prominence) {
  const auto& y = curve.density;
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  std::vector<double> peaks;
  if (n < 3) return peaks;
  const double top = *std::max_element(y.begin(), y.end());
  if (!(top > 0.0)) return peaks;

  for (std::ptrdiff_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    std::ptrdiff_t end = i;
    while (end + 1 < n && y[end + 1] == y[i]) ++end;
    if (end + 1 >= n || !(y[end + 1] < y[i])) {
      i = end;
      continue;
    }
    const double h = y[i];
    double left_min = h;
    for (std::ptrdiff_t j = i - 1; j >= 0 && y[j] <= h; --j) left_min = std::min(left_min, y[j]);
    double right_min = h;
    for (std::ptrdiff_t j = end + 1; j < n && y[j] <= h; ++j) right_min = std::min(right_min, y[j]);
    if (h - std::max(left_min, right_min) >= min_prominence * top) {
      peaks.push_back(0.5 * (curve.x[i] + curve.x[end]));
    }
    i = end;
  }
  return peaks;
}

ModeGrid mode_grid(const DiffusedGmm& target, const ModeOptions& opts) {
  const GmmTarget p = target.at(target.noise_schedule().t_min());
  double lo = 1e300;
  double hi = -1e300;
  double min_sd = 1e300;
  double max_sd = 0.0;
  for (const auto& c : p.components()) {
    const double sd = std::sqrt(c.variance[0]);
    lo = std::min(lo, c.mean[0]);
    hi = std::max(hi, c.mean[0]);
    min_sd = std::min(min_sd, sd);
    max_sd = std::max(max_sd, sd);
  }
  return {lo - 6.0 * max_sd, hi + 6.0 * max_sd, opts.bin_fraction * min_sd};
}

std::vector<double> detect_modes(const Points& samples, const DiffusedGmm& target, const ModeOptions& opts) {
  const auto xs = one_dimensional(samples, "mode detection");
  if (target.dim() != 1) throw std::invalid_argument("mode detection supports one-dimensional targets only");
  const ModeGrid g = mode_grid(target, opts);
  return find_peaks(histogram_density(xs, g.lo, g.hi, g.bin_width, opts.smoothing_bins), opts.min_prominence);
}

LogLikelihood mean_log_likelihood(const Points& samples, const DiffusedGmm& target) {
  if (samples.cols() == 0) throw std::invalid_argument("log-likelihood needs samples");
  const Eigen::VectorXd ll = log_density(target, samples, target.noise_schedule().t_min());
  const double n = static_cast<double>(ll.size());
  LogLikelihood out{ll.mean(), 0.0};
  if (ll.size() > 1) out.std_error = std::sqrt((ll.array() - out.mean).square().sum() / (n - 1.0) / n);
  return out;
}

ProbeGrid ProbeGrid::geometric(double lo, int count, int points_per_time, std::uint64_t seed) {
  if (count < 1 || !(lo > 0.0 && lo <= 1.0)) throw std::invalid_argument("invalid probe grid");
  ProbeGrid g{{}, points_per_time, seed};
  for (int k = 0; k < count; ++k) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(k) / (count - 1);
    g.times.push_back(std::exp(std::log(lo) * (1.0 - frac)));
  }
  g.times.back() = 1.0;
  return g;
}

double score_mse(const ScoreSource& src, const DiffusedGmm& target, const ProbeGrid& grid) {
  if (grid.times.empty() || grid.points_per_time < 1) throw std::invalid_argument("empty probe grid");
  const ScoreSource oracle = ScoreSource::oracle(target);
  double total = 0.0;
  for (std::size_t k = 0; k < grid.times.size(); ++k) {
    const double t = target.noise_schedule().clamp(grid.times[k]);
    const Points xs = sample(target, grid.points_per_time, t, derive_seed(grid.seed, k));
    total += (eval_score(src, xs, t) - eval_score(oracle, xs, t)).colwise().squaredNorm().mean();
  }
  return total / static_cast<double>(grid.times.size());
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("Wasserstein distance needs non-empty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
    return acc / static_cast<double>(a.size());
  }
  // Integrate |F_a - F_b| over the merged support.
  const double wa = 1.0 / static_cast<double>(a.size());
  const double wb = 1.0 / static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double fa = 0.0;
  double fb = 0.0;
  double x = std::min(a.front(), b.front());
  double acc = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = j >= b.size() || (i < a.size() && a[i] <= b[j]) ? a[i] : b[j];
    acc += std::abs(fa - fb) * (next - x);
    x = next;
    while (i < a.size() && a[i] == x) {
      fa += wa;
      ++i;
    }
    while (j < b.size() && b[j] == x) {
      fb += wb;
      ++j;
    }
  }
  return acc;
}

double wasserstein1_to_target(std::span<const double> samples, const DiffusedGmm& target, int max_quantiles) {
  if (target.dim() != 1) throw std::invalid_argument("Wasserstein distance supports one-dimensional targets only");
  if (samples.empty()) throw std::invalid_argument("Wasserstein distance needs non-empty samples");
  const GmmTarget p = target.at(target.noise_schedule().t_min());
  const auto m = static_cast<std::size_t>(std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(samples.size()),
                                                                   std::max(1, max_quantiles)));
  std::vector<double> q(m);
  for (std::size_t i = 0; i < m; ++i) q[i] = quantile_1d(p, (static_cast<double>(i) + 0.5) / static_cast<double>(m));
  return wasserstein1(std::vector<double>(samples.begin(), samples.end()), std::move(q));
}

EvalReport evaluate(const Points& samples, const DiffusedGmm& target, const ScoreSource& src, const ProbeGrid& grid,
                    const ModeOptions& opts) {
  const auto xs = one_dimensional(samples, "evaluation");
  EvalReport r;
  r.log_likelihood = mean_log_likelihood(samples, target);
  r.score_mse = score_mse(src, target, grid);
  const ModeGrid g = mode_grid(target, opts);
  r.density = histogram_density(xs, g.lo, g.hi, g.bin_width, opts.smoothing_bins);
  r.modes = find_peaks(r.density, opts.min_prominence);
  r.w1 = wasserstein1_to_target(xs, target);
  return r;
}

void write_report_text(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "mean_log_likelihood = " << csv::format_number(report.log_likelihood.mean) << '\n';
  out << "log_likelihood_std_error = " << csv::format_number(report.log_likelihood.std_error) << '\n';
  out << "score_mse = " << csv::format_number(report.score_mse) << '\n';
  out << "modes_detected = " << report.modes.size() << '\n';
  out << "mode_locations =";
  for (double m : report.modes) out << ' ' << csv::format_number(m);
  out << '\n';
  out << "w1 = " << csv::format_number(report.w1) << '\n';
}

void write_density_csv(const std::filesystem::path& path, const DensityCurve& curve) {
  csv::Table table{{"x", "density"}, {}};
  for (std::size_t i = 0; i < curve.x.size(); ++i) table.rows.push_back({curve.x[i], curve.density[i]});
  csv::write(path, table);
}

}  // namespace geosched
