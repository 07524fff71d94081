#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "geosched/score_model.hpp"
#include "geosched/target_oracle.hpp"

namespace geosched {

struct DensityCurve {
  std::vector<double> x;
  std::vector<double> density;
};

struct ModeOptions {
  /// Bin width as a multiple of the smallest component std at t_min.
  double bin_fraction = 0.25;
  /// Standard deviation of the Gaussian smoothing kernel, in bins.
  double smoothing_bins = 3.0;
  /// Minimum peak prominence relative to the global maximum.
  double min_prominence = 0.05;
};

/// Histogram on [lo, hi) normalised to a density, smoothed with a Gaussian
/// kernel of `smoothing_bins` bins (0 disables smoothing). Samples outside the
/// range are dropped.
DensityCurve histogram_density(std::span<const double> samples, double lo, double hi, double bin_width,
                               double smoothing_bins);

/// Local maxima whose topographic prominence is at least min_prominence times
/// the global maximum. Plateaus report their centre.
std::vector<double> find_peaks(const DensityCurve& curve, double min_prominence);

/// Binning range and width derived from the target's marginal at t_min.
struct ModeGrid {
  double lo = 0.0;
  double hi = 0.0;
  double bin_width = 0.0;
};
ModeGrid mode_grid(const DiffusedGmm& target, const ModeOptions& opts = {});

/// Mode locations of one-dimensional samples. Throws std::invalid_argument for dim > 1.
std::vector<double> detect_modes(const Points& samples, const DiffusedGmm& target, const ModeOptions& opts = {});

struct LogLikelihood {
  double mean = 0.0;
  double std_error = 0.0;
};
/// Mean log density of the samples under the target's marginal at t_min.
LogLikelihood mean_log_likelihood(const Points& samples, const DiffusedGmm& target);

struct ProbeGrid {
  std::vector<double> times;
  int points_per_time = 512;
  std::uint64_t seed = 0;

  /// `count` times spaced geometrically from `lo` to 1.
  static ProbeGrid geometric(double lo, int count, int points_per_time = 512, std::uint64_t seed = 0);
};

/// Mean over probe times and points x ~ p_t of ||S(x, t) - oracle(x, t)||^2.
double score_mse(const ScoreSource& src, const DiffusedGmm& target, const ProbeGrid& grid);

/// Exact Wasserstein-1 distance between two one-dimensional empirical measures.
double wasserstein1(std::vector<double> a, std::vector<double> b);
/// W1 between samples and the target at t_min, represented by its
/// (i + 1/2) / m quantiles with m = min(n, max_quantiles).
double wasserstein1_to_target(std::span<const double> samples, const DiffusedGmm& target, int max_quantiles = 20000);

struct EvalReport {
  LogLikelihood log_likelihood;
  double score_mse = 0.0;
  std::vector<double> modes;
  double w1 = 0.0;
  DensityCurve density;
};

EvalReport evaluate(const Points& samples, const DiffusedGmm& target, const ScoreSource& src, const ProbeGrid& grid,
                    const ModeOptions& opts = {});

/// Key-value text report, one "key = value" per line.
void write_report_text(const std::filesystem::path& path, const EvalReport& report);
void write_density_csv(const std::filesystem::path& path, const DensityCurve& curve);

}  // namespace geosched
