#include <gtest/gtest.h>

#include <cmath>

#include "geosched/target_oracle.hpp"

using namespace geosched;

namespace {

Points point(double x) { return Points::Constant(1, 1, x); }

struct BimodalRef {
  double x, logp, score, d2, d3;
};
// bimodal_target(6, 0.1) under VP-linear at t = 0.3, from make_reference.py.
constexpr BimodalRef kBimodal[] = {
    {-2.0, -3.9622659970507381, -2.9249701697885827, -1.6457380083836956, 3.0524138195137205e-8},
    {0.3, -11.289094081639226, 5.4313761832369287, 1.8916838335982041, -41.91913926573137},
    {1.7, -4.9138152578882896, 3.4186915650084483, -1.6457379085254812, -1.2720505698190151e-6},
};

}  // namespace

TEST(GmmTarget, RejectsMalformedComponents) {
  EXPECT_THROW(GmmTarget({}), std::invalid_argument);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(2);
  EXPECT_THROW(GmmTarget({{1.0, m1, m2}}), std::invalid_argument);
  EXPECT_THROW(GmmTarget({{-1.0, m1, m1.array() + 1.0}}), std::invalid_argument);
  EXPECT_THROW(GmmTarget({{1.0, m1, m1}}), std::invalid_argument);
}

TEST(DiffusedGmm, BimodalMatchesReferenceValues) {
  const DiffusedGmm p(bimodal_target(6.0, 0.1), NoiseSchedule{});
  for (const auto& r : kBimodal) {
    EXPECT_NEAR(log_density(p, Eigen::VectorXd(Eigen::VectorXd::Constant(1, r.x)), 0.3), r.logp, 1e-12) << r.x;
    EXPECT_NEAR(score(p, point(r.x), 0.3)(0, 0), r.score, 1e-12) << r.x;
    EXPECT_NEAR(score_derivative_1d(p, r.x, 0.3, 2), r.d2, 1e-11) << r.x;
    EXPECT_NEAR(score_derivative_1d(p, r.x, 0.3, 3), r.d3, 1e-10 * std::max(1.0, std::abs(r.d3))) << r.x;
  }
}

TEST(DiffusedGmm, ScoreIsGradientOfLogDensity) {
  const DiffusedGmm p(cantor_target(2, 1e-3, NoiseSchedule{}), NoiseSchedule{});
  const double h = 1e-5;
  for (double x : {-0.3, 0.05, 0.31, 0.5, 0.93}) {
    for (double t : {1e-3, 0.05, 0.4}) {
      const double fd = (log_density(p, Eigen::VectorXd(Eigen::VectorXd::Constant(1, x + h)), t) -
                         log_density(p, Eigen::VectorXd(Eigen::VectorXd::Constant(1, x - h)), t)) /
                        (2 * h);
      EXPECT_NEAR(score(p, point(x), t)(0, 0), fd, 1e-4 * std::max(1.0, std::abs(fd))) << x << " " << t;
    }
  }
}

TEST(DiffusedGmm, DerivativesMatchFiniteDifferences) {
  const DiffusedGmm p(bimodal_target(6.0, 0.1), NoiseSchedule{});
  const double h = 1e-4;
  for (double x : {-2.5, -0.4, 0.0, 0.9, 2.2}) {
    for (double t : {0.1, 0.3, 0.7}) {
      const double d2_fd = (score(p, point(x + h), t)(0, 0) - score(p, point(x - h), t)(0, 0)) / (2 * h);
      EXPECT_NEAR(score_derivative_1d(p, x, t, 2), d2_fd, 1e-5 * std::max(1.0, std::abs(d2_fd)));
      const double d3_fd =
          (score_derivative_1d(p, x + h, t, 2) - score_derivative_1d(p, x - h, t, 2)) / (2 * h);
      EXPECT_NEAR(score_derivative_1d(p, x, t, 3), d3_fd, 1e-4 * std::max(1.0, std::abs(d3_fd)));
    }
  }
  EXPECT_THROW(score_derivative_1d(p, 0.0, 0.3, 4), std::invalid_argument);
}

TEST(DiffusedGmm, GaussianHasLinearScoreAndZeroThirdDerivative) {
  const NoiseSchedule ns;
  const DiffusedGmm p(gaussian_target(0.0, 0.01), ns);
  for (double t : {1e-5, 0.2, 0.9}) {
    const auto k = kernel_params(ns, t);
    const double var = k.s * k.s * 0.01 + k.sigma * k.sigma;
    EXPECT_NEAR(score(p, point(1.3), t)(0, 0), -1.3 / var, 1e-12 / var);
    EXPECT_EQ(score_derivative_1d(p, 0.7, t, 3), 0.0);
  }
}

TEST(DiffusedGmm, MarginalOfStandardNormalIsStationaryUnderVp) {
  const DiffusedGmm p(standard_normal_target(3), NoiseSchedule{});
  const auto m = p.at(0.6);
  ASSERT_EQ(m.size(), 1u);
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(m.components()[0].variance(d), 1.0, 1e-15);
}

TEST(DiffusedGmm, TimeZeroIsTheBaseTarget) {
  const DiffusedGmm p(bimodal_target(), NoiseSchedule{});
  EXPECT_EQ(score(p, point(5.9), 0.0)(0, 0), score(p.base(), point(5.9))(0, 0));
  EXPECT_THROW(p.at(1.5), std::domain_error);
}

TEST(Sampling, MomentsMatchMixture) {
  const GmmTarget tgt = bimodal_target(6.0, 0.1);
  const Points xs = sample(tgt, 200000, 11);
  const double mean = xs.mean();
  const double var = (xs.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 5 * std::sqrt(36.01 / 200000));
  EXPECT_NEAR(var, 36.01, 0.01 * 36.01);
}

TEST(Sampling, DeterministicInSeed) {
  const GmmTarget tgt = cantor_target(3, 1e-5, NoiseSchedule{});
  EXPECT_EQ(sample(tgt, 100, 4), sample(tgt, 100, 4));
  EXPECT_NE(sample(tgt, 100, 4), sample(tgt, 100, 5));
  // Prefix property: draw i depends only on (seed, i).
  EXPECT_EQ(sample(tgt, 50, 4), sample(tgt, 100, 4).leftCols(50));
}

TEST(Sampling, DiffusedDrawsHaveKernelVariance) {
  const NoiseSchedule ns;
  const DiffusedGmm p(gaussian_target(0.0, 0.01), ns);
  const double t = 0.25;
  const auto k = kernel_params(ns, t);
  const double var = k.s * k.s * 0.01 + k.sigma * k.sigma;
  const Points xs = sample(p, 200000, t, 3);
  EXPECT_NEAR(xs.array().square().mean(), var, 0.015 * var);
}

TEST(Quantile, InvertsCdf) {
  const GmmTarget tgt = bimodal_target(6.0, 0.1);
  for (double q : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
    EXPECT_NEAR(cdf_1d(tgt, quantile_1d(tgt, q)), q, 1e-10) << q;
  }
  EXPECT_NEAR(quantile_1d(tgt, 0.25), -6.0, 1e-8);
}

TEST(Cantor, LevelThreeHasEightEquallyWeightedModes) {
  const NoiseSchedule ns;
  const GmmTarget tgt = cantor_target(3, 1e-5, ns);
  ASSERT_EQ(tgt.size(), 8u);
  const double expected[] = {1.0 / 54, 5.0 / 54, 13.0 / 54, 17.0 / 54, 37.0 / 54, 41.0 / 54, 49.0 / 54, 53.0 / 54};
  const double var = sigma_at(ns, 1e-5) * sigma_at(ns, 1e-5);
  for (std::size_t k = 0; k < 8; ++k) {
    const auto& c = tgt.components()[k];
    EXPECT_NEAR(c.weight, 0.125, 1e-15);
    EXPECT_NEAR(c.mean(0), kernel_params(ns, 1e-5).s * expected[k], 1e-12);
    EXPECT_NEAR(c.variance(0), var, 1e-18);
  }
}
