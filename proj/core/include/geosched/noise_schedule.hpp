#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace geosched {

inline constexpr double kDefaultTMin = 1e-5;

struct VPLinear {
  double beta_min = 0.1;
  double beta_max = 20.0;
};

struct VPCosine {
  double epsilon = 0.008;
};

struct VESigma {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
};

/// Continuous-time noising law. The marginal kernel is
/// p(x_t | x_0) = N(s(t) x_0, sigma(t)^2 I) and the forward SDE is
/// dX = f(t) X dt + g(t) dW.
class NoiseSchedule {
 public:
  using Family = std::variant<VPLinear, VPCosine, VESigma>;

  explicit NoiseSchedule(Family family = VPLinear{}, double t_min = kDefaultTMin);

  const Family& family() const { return family_; }
  double t_min() const { return t_min_; }
  bool variance_preserving() const { return !std::holds_alternative<VESigma>(family_); }

  /// Evaluation time with the t_min floor applied.
  double clamp(double t) const { return t < t_min_ ? t_min_ : t; }

  std::string describe() const;
  /// Stable 64-bit fingerprint of the family and its parameters.
  std::uint64_t fingerprint() const;

 private:
  Family family_;
  double t_min_;
};

/// Cumulative signal fraction of the VP families. Throws std::invalid_argument
/// for VESigma.
double alpha_bar(const NoiseSchedule& sched, double t);

/// Instantaneous rate beta(t) = -d/dt log alpha_bar(t) of the VP families.
double beta(const NoiseSchedule& sched, double t);

struct KernelParams {
  double s;
  double sigma;
};
KernelParams kernel_params(const NoiseSchedule& sched, double t);

inline double sigma_at(const NoiseSchedule& sched, double t) { return kernel_params(sched, t).sigma; }

struct SdeCoeffs {
  double f;
  double g;
};
/// VP: f = -beta/2, g = sqrt(beta). VE: f = 0, g = sqrt(d sigma^2 / dt).
SdeCoeffs sde_coeffs(const NoiseSchedule& sched, double t);

/// Corrector speed v(t) = sigma(t).
double velocity(const NoiseSchedule& sched, double t);

/// Inverse of sigma(t) on [0, 1]. Throws std::range_error outside the image.
double time_for_sigma(const NoiseSchedule& sched, double sigma);

/// Strictly increasing grid t_0 < ... < t_T with t_T = 1 and t_0 >= 0.
class DiscretisationSchedule {
 public:
  DiscretisationSchedule() = default;
  explicit DiscretisationSchedule(std::vector<double> times);

  static DiscretisationSchedule uniform(int steps);

  /// Number of intervals T.
  int steps() const { return static_cast<int>(times_.size()) - 1; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t i) const { return times_[i]; }
  std::span<const double> times() const { return times_; }
  const std::vector<double>& values() const { return times_; }

  bool operator==(const DiscretisationSchedule&) const = default;

 private:
  std::vector<double> times_;
};

void write_schedule_csv(const std::filesystem::path& path, const DiscretisationSchedule& sched);
DiscretisationSchedule read_schedule_csv(const std::filesystem::path& path);

struct UniformT {};
/// Grid at which the schedule's sigma matches the cosine family's sigma at i/T.
struct CosineSpaced {
  double epsilon = 0.008;
};
struct LogLinearSigma {};
struct KarrasRho {
  double rho = 7.0;
};
using BaselineKind = std::variant<UniformT, CosineSpaced, LogLinearSigma, KarrasRho>;

/// The n+1 values sigma_0 = sigma_max > ... > sigma_{n-1} = sigma_min, sigma_n = 0.
std::vector<double> karras_sigmas(double sigma_min, double sigma_max, double rho, int n);

/// Hand-designed discretisations. Sigma-based kinds place sigma_N = 0 at t = 0
/// and span [sigma(t_min), sigma(1)] with the remaining T points.
DiscretisationSchedule baseline_schedule(const BaselineKind& kind, int steps, const NoiseSchedule& sched);

}  // namespace geosched
