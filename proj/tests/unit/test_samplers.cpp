#include <gtest/gtest.h>

#include <cmath>

#include "geosched/samplers.hpp"

using namespace geosched;

namespace {

double variance(const Points& x) {
  const double m = x.mean();
  return (x.array() - m).square().mean();
}

DiscretisationSchedule log_grid(int steps, double lo) {
  std::vector<double> t(steps + 1);
  t[0] = 0.0;
  for (int i = 1; i <= steps; ++i) t[i] = lo * std::pow(1.0 / lo, (i - 1.0) / (steps - 1.0));
  return DiscretisationSchedule(std::move(t));
}

}  // namespace

TEST(Samplers, NamesAreStable) {
  EXPECT_EQ(sampler_name(ReverseSde{}), "reverse-sde");
  EXPECT_EQ(sampler_name(OdeHeun{}), "ode-heun");
  EXPECT_EQ(sampler_name(PredictorCorrector{}), "predictor-corrector");
}

TEST(Samplers, StationaryTargetStaysStandardNormal) {
  const auto src = ScoreSource::oracle(DiffusedGmm(standard_normal_target(), NoiseSchedule{}));
  for (const SamplerKind& kind : {SamplerKind{ReverseSde{}}, SamplerKind{OdeEuler{}}, SamplerKind{OdeHeun{}},
                                  SamplerKind{AnnealedLangevin{}}, SamplerKind{PredictorCorrector{}}}) {
    const Points x = sample({kind, DiscretisationSchedule::uniform(50), 3}, src, 20000);
    EXPECT_NEAR(x.mean(), 0.0, 0.05) << sampler_name(kind);
    EXPECT_NEAR(variance(x), 1.0, 0.05) << sampler_name(kind);
  }
}

TEST(Samplers, RecoverNarrowGaussianVariance) {
  const auto src = ScoreSource::oracle(DiffusedGmm(gaussian_target(1.0, 0.01), NoiseSchedule{}));
  const auto grid = log_grid(400, 1e-4);
  for (const SamplerKind& kind : {SamplerKind{ReverseSde{}}, SamplerKind{OdeHeun{}}}) {
    const Points x = sample({kind, grid, 1}, src, 20000);
    EXPECT_NEAR(x.mean(), 1.0, 0.01) << sampler_name(kind);
    EXPECT_NEAR(variance(x), 0.01, 0.001) << sampler_name(kind);
  }
}

TEST(Samplers, ReverseSdeUniformGridVariance) {
  const auto src = ScoreSource::oracle(DiffusedGmm(gaussian_target(0.0, 0.25), NoiseSchedule{}));
  const Points x = sample({ReverseSde{}, DiscretisationSchedule::uniform(1000), 3}, src, 100000);
  EXPECT_NEAR(variance(x) / 0.25, 1.0, 0.02);
}

TEST(Samplers, CoarseFinalIntervalKeepsItsNoise) {
  const auto src = ScoreSource::oracle(DiffusedGmm(gaussian_target(0.0, 0.01), NoiseSchedule{}));
  const Points x = sample({ReverseSde{}, DiscretisationSchedule::uniform(50), 3}, src, 40000);
  EXPECT_GT(variance(x), 0.01);
}

TEST(Samplers, ReverseSdeFindsBothModes) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  const Points x = sample({ReverseSde{}, log_grid(200, 1e-4), 5}, src, 4000);
  const double right = (x.array() > 0.0).cast<double>().mean();
  EXPECT_NEAR(right, 0.5, 0.05);
  EXPECT_LT((x.array().abs() - 6.0).abs().maxCoeff(), 1.5);
}

TEST(Samplers, VeStartsAtSigmaMax) {
  const NoiseSchedule ve(VESigma{});
  const auto src = ScoreSource::oracle(DiffusedGmm(gaussian_target(0.0, 0.25), ve));
  const DiscretisationSchedule one_step({0.0, 1.0});
  // A single Euler ODE step from t = 1 to 0 scales the prior draw by 1 - g^2 h / (2 V).
  const Points x = sample({OdeEuler{}, one_step, 2}, src, 50000);
  const double g2 = std::pow(sde_coeffs(ve, 1.0).g, 2);
  const double V = 0.25 + 6400.0;
  const double scale = 80.0 * (1.0 - 0.5 * g2 / V);
  EXPECT_NEAR(std::sqrt(variance(x)), std::abs(scale), 0.02 * std::abs(scale));
}

TEST(Samplers, DeterministicAndShardInvariant) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  const SamplerConfig cfg{ReverseSde{}, DiscretisationSchedule::uniform(20), 9};
  const Points a = sample(cfg, src, 64);
  EXPECT_EQ(a, sample(cfg, src, 64));
  EXPECT_EQ(a.leftCols(16), sample(cfg, src, 16));
  SamplerConfig other = cfg;
  other.seed = 10;
  EXPECT_NE(a, sample(other, src, 64));
}

TEST(Samplers, RejectGridBelowTMin) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  EXPECT_THROW(sample({OdeEuler{}, DiscretisationSchedule({0.0, 1e-6, 1.0}), 1}, src, 4), std::invalid_argument);
  EXPECT_THROW(sample({OdeEuler{}, DiscretisationSchedule({1e-7, 0.5, 1.0}), 1}, src, 4), std::invalid_argument);
  EXPECT_NO_THROW(sample({OdeEuler{}, DiscretisationSchedule({0.0, 1e-5, 1.0}), 1}, src, 4));
}

TEST(Langevin, ContractsTowardsStandardNormal) {
  const auto src = ScoreSource::oracle(DiffusedGmm(standard_normal_target(), NoiseSchedule{}));
  const Points start = Points::Constant(1, 5000, 5.0);
  // eta = 0.01 sigma(1)^2; the mean decays like (1 - eta)^k.
  const Points x = langevin_corrector(src, start, 1.0, 1000, 0.01, 4);
  EXPECT_NEAR(x.mean(), 0.0, 0.05);
  EXPECT_NEAR(variance(x), 1.0, 0.06);
  const Points early = langevin_corrector(src, start, 1.0, 200, 0.01, 4);
  EXPECT_NEAR(early.mean(), 5.0 * std::pow(1.0 - 0.01 * std::pow(sigma_at(NoiseSchedule{}, 1.0), 2), 200), 0.05);
}

TEST(Langevin, ZeroStepsIsIdentity) {
  const auto src = ScoreSource::oracle(DiffusedGmm(bimodal_target(), NoiseSchedule{}));
  const Points start = Points::Constant(1, 3, 1.5);
  EXPECT_EQ(langevin_corrector(src, start, 0.5, 0, 0.1, 1), start);
  EXPECT_THROW(langevin_corrector(src, start, 0.5, 1, 0.0, 1), std::invalid_argument);
}
