#include "geosched/noise_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "geosched/csv.hpp"

namespace geosched {

namespace {

constexpr double kCosineFloor = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double cosine_f(const VPCosine& c, double t) {
  const double u = (t + c.epsilon) / (1.0 + c.epsilon) * std::numbers::pi / 2.0;
  const double cu = std::cos(u);
  return cu * cu;
}

double cosine_alpha_raw(const VPCosine& c, double t) { return cosine_f(c, t) / cosine_f(c, 0.0); }

double linear_integral(const VPLinear& l, double t) {
  return l.beta_min * t + 0.5 * t * t * (l.beta_max - l.beta_min);
}

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

NoiseSchedule::NoiseSchedule(Family family, double t_min) : family_(family), t_min_(t_min) {
  if (!(t_min > 0.0 && t_min < 1.0)) throw std::invalid_argument("t_min must lie in (0, 1)");
  std::visit(overloaded{
                 [](const VPLinear& l) {
                   if (!(l.beta_min > 0.0) || !(l.beta_max >= l.beta_min))
                     throw std::invalid_argument("VPLinear requires 0 < beta_min <= beta_max");
                 },
                 [](const VPCosine& c) {
                   if (!(c.epsilon > 0.0)) throw std::invalid_argument("VPCosine requires epsilon > 0");
                 },
                 [](const VESigma& v) {
                   if (!(v.sigma_min > 0.0) || !(v.sigma_max >= v.sigma_min))
                     throw std::invalid_argument("VESigma requires 0 < sigma_min <= sigma_max");
                 },
             },
             family_);
}

std::string NoiseSchedule::describe() const {
  return std::visit(
      overloaded{
          [&](const VPLinear& l) {
            return fmt::format("vp-linear(beta_min={}, beta_max={}, t_min={})", l.beta_min, l.beta_max, t_min_);
          },
          [&](const VPCosine& c) { return fmt::format("vp-cosine(epsilon={}, t_min={})", c.epsilon, t_min_); },
          [&](const VESigma& v) {
            return fmt::format("ve(sigma_min={}, sigma_max={}, t_min={})", v.sigma_min, v.sigma_max, t_min_);
          },
      },
      family_);
}

std::uint64_t NoiseSchedule::fingerprint() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto index = static_cast<std::uint64_t>(family_.index());
  h = fnv1a(h, &index, sizeof index);
  std::visit(overloaded{
                 [&](const VPLinear& l) {
                   h = fnv1a(h, &l.beta_min, sizeof(double));
                   h = fnv1a(h, &l.beta_max, sizeof(double));
                 },
                 [&](const VPCosine& c) { h = fnv1a(h, &c.epsilon, sizeof(double)); },
                 [&](const VESigma& v) {
                   h = fnv1a(h, &v.sigma_min, sizeof(double));
                   h = fnv1a(h, &v.sigma_max, sizeof(double));
                 },
             },
             family_);
  return fnv1a(h, &t_min_, sizeof t_min_);
}

double alpha_bar(const NoiseSchedule& sched, double t) {
  return std::visit(overloaded{
                        [&](const VPLinear& l) { return std::exp(-linear_integral(l, t)); },
                        [&](const VPCosine& c) {
                          return std::clamp(cosine_alpha_raw(c, t), kCosineFloor, 1.0 - kCosineFloor);
                        },
                        [](const VESigma&) -> double {
                          throw std::invalid_argument("alpha_bar is undefined for the VE family");
                        },
                    },
                    sched.family());
}

double beta(const NoiseSchedule& sched, double t) {
  return std::visit(overloaded{
                        [&](const VPLinear& l) { return l.beta_min + t * (l.beta_max - l.beta_min); },
                        [&](const VPCosine& c) {
                          const double raw = cosine_alpha_raw(c, t);
                          // alpha_bar is constant inside the clipped regions.
                          if (raw <= kCosineFloor || raw >= 1.0 - kCosineFloor) return 0.0;
                          const double u = (t + c.epsilon) / (1.0 + c.epsilon) * std::numbers::pi / 2.0;
                          return std::numbers::pi * std::tan(u) / (1.0 + c.epsilon);
                        },
                        [](const VESigma&) -> double {
                          throw std::invalid_argument("beta is undefined for the VE family");
                        },
                    },
                    sched.family());
}

KernelParams kernel_params(const NoiseSchedule& sched, double t) {
  if (const auto* ve = std::get_if<VESigma>(&sched.family())) {
    return {1.0, ve->sigma_min * std::pow(ve->sigma_max / ve->sigma_min, t)};
  }
  const double a = alpha_bar(sched, t);
  // 1 - exp(-x) loses precision for small x; use expm1 on the linear family.
  double var = 1.0 - a;
  if (const auto* l = std::get_if<VPLinear>(&sched.family())) var = -std::expm1(-linear_integral(*l, t));
  return {std::sqrt(a), std::sqrt(var)};
}

SdeCoeffs sde_coeffs(const NoiseSchedule& sched, double t) {
  if (const auto* ve = std::get_if<VESigma>(&sched.family())) {
    const double sig = kernel_params(sched, t).sigma;
    const double log_ratio = std::log(ve->sigma_max / ve->sigma_min);
    return {0.0, std::sqrt(2.0 * sig * sig * log_ratio)};
  }
  const double b = beta(sched, t);
  return {-0.5 * b, std::sqrt(b)};
}

double velocity(const NoiseSchedule& sched, double t) { return kernel_params(sched, t).sigma; }

double time_for_sigma(const NoiseSchedule& sched, double sigma) {
  const double lo = kernel_params(sched, 0.0).sigma;
  const double hi = kernel_params(sched, 1.0).sigma;
  const double tol = 1e-12 * std::max(1.0, hi);
  if (!(sigma >= lo - tol && sigma <= hi + tol)) {
    throw std::range_error(fmt::format("sigma={} outside the invertible range [{}, {}] of {}", sigma, lo, hi,
                                       sched.describe()));
  }
  if (sigma <= lo) return 0.0;
  if (sigma >= hi) return 1.0;
  return std::visit(overloaded{
                        [&](const VPLinear& l) {
                          const double integral = -std::log1p(-sigma * sigma);
                          const double a = 0.5 * (l.beta_max - l.beta_min);
                          const double b = l.beta_min;
                          return 2.0 * integral / (b + std::sqrt(b * b + 4.0 * a * integral));
                        },
                        [&](const VPCosine& c) {
                          const double ab = 1.0 - sigma * sigma;
                          const double u = std::acos(std::sqrt(ab * cosine_f(c, 0.0)));
                          return std::clamp(u * 2.0 / std::numbers::pi * (1.0 + c.epsilon) - c.epsilon, 0.0, 1.0);
                        },
                        [&](const VESigma& v) { return std::log(sigma / v.sigma_min) / std::log(v.sigma_max / v.sigma_min); },
                    },
                    sched.family());
}

DiscretisationSchedule::DiscretisationSchedule(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw std::invalid_argument("a discretisation needs at least one interval");
  if (!(times_.front() >= 0.0)) throw std::invalid_argument("discretisation must start at t >= 0");
  if (times_.back() != 1.0) throw std::invalid_argument("discretisation must end at t = 1");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1]))
      throw std::invalid_argument(fmt::format("discretisation not strictly increasing at index {}", i));
  }
}

DiscretisationSchedule DiscretisationSchedule::uniform(int steps) {
  if (steps < 1) throw std::invalid_argument("T must be >= 1");
  std::vector<double> t(steps + 1);
  for (int i = 0; i <= steps; ++i) t[i] = static_cast<double>(i) / steps;
  t.back() = 1.0;
  return DiscretisationSchedule(std::move(t));
}

void write_schedule_csv(const std::filesystem::path& path, const DiscretisationSchedule& sched) {
  csv::write_column(path, "t", sched.values());
}

DiscretisationSchedule read_schedule_csv(const std::filesystem::path& path) {
  return DiscretisationSchedule(csv::read_column(path));
}

std::vector<double> karras_sigmas(double sigma_min, double sigma_max, double rho, int n) {
  if (n < 1) throw std::invalid_argument("karras_sigmas needs n >= 1");
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  std::vector<double> out(n + 1);
  const double a = std::pow(sigma_max, 1.0 / rho);
  const double b = std::pow(sigma_min, 1.0 / rho);
  for (int i = 0; i < n; ++i) {
    const double frac = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    out[i] = std::pow(a + frac * (b - a), rho);
  }
  out[0] = sigma_max;
  if (n > 1) out[n - 1] = sigma_min;
  out[n] = 0.0;
  return out;
}

DiscretisationSchedule baseline_schedule(const BaselineKind& kind, int steps, const NoiseSchedule& sched) {
  if (steps < 1) throw std::invalid_argument("T must be >= 1");
  const double sig_lo = kernel_params(sched, sched.t_min()).sigma;
  const double sig_hi = kernel_params(sched, 1.0).sigma;

  // Decreasing sigma sequence of length T+1 ending in 0, mapped to increasing times.
  auto from_sigmas = [&](const std::vector<double>& sigmas) {
    std::vector<double> t(steps + 1);
    t[0] = 0.0;
    t[steps] = 1.0;
    for (int k = 1; k < steps; ++k) t[k] = time_for_sigma(sched, sigmas[steps - k]);
    return DiscretisationSchedule(std::move(t));
  };

  return std::visit(
      overloaded{
          [&](const UniformT&) { return DiscretisationSchedule::uniform(steps); },
          [&](const CosineSpaced& c) {
            const NoiseSchedule cosine(VPCosine{c.epsilon}, sched.t_min());
            std::vector<double> t(steps + 1);
            t[0] = 0.0;
            t[steps] = 1.0;
            for (int k = 1; k < steps; ++k) {
              t[k] = time_for_sigma(sched, kernel_params(cosine, static_cast<double>(k) / steps).sigma);
            }
            return DiscretisationSchedule(std::move(t));
          },
          [&](const LogLinearSigma&) {
            std::vector<double> sigmas(steps + 1);
            for (int i = 0; i < steps; ++i) {
              const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
              sigmas[i] = std::exp(std::log(sig_hi) + frac * (std::log(sig_lo) - std::log(sig_hi)));
            }
            sigmas[steps] = 0.0;
            return from_sigmas(sigmas);
          },
          [&](const KarrasRho& k) { return from_sigmas(karras_sigmas(sig_lo, sig_hi, k.rho, steps)); },
      },
      kind);
}

}  // namespace geosched
