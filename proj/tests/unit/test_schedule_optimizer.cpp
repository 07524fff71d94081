#include <gtest/gtest.h>

#include <cmath>

#include "geosched/rng.hpp"
#include "geosched/schedule_optimizer.hpp"

using namespace geosched;

TEST(Interpolant, HandComputedInverse) {
  // Lambda = {0, 3, 4} on {0, 0.5, 1}; the midpoint of the length lies at 2.
  const DiscretisationSchedule d({0.0, 0.5, 1.0});
  EXPECT_NEAR(update_schedule(d, {9.0, 1.0})[1], 7.0 / 27.0, 1e-15);
  EXPECT_NEAR(update_schedule(d, {9.0, 1.0}, Interpolation::Linear)[1], 1.0 / 3.0, 1e-15);
}

TEST(Interpolant, ReproducesKnotsAndLinearData) {
  const MonotoneInterpolant f({0.0, 1.0, 3.0, 4.0}, {0.0, 2.0, 6.0, 8.0});
  for (double x : {0.0, 0.3, 1.0, 2.2, 3.0, 3.9, 4.0}) EXPECT_NEAR(f(x), 2.0 * x, 1e-14);
  EXPECT_EQ(f(-1.0), 0.0);
  EXPECT_EQ(f(5.0), 8.0);
}

TEST(Interpolant, MonotoneOnRandomData) {
  SplitMix64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> u{0.0};
    std::vector<double> y{0.0};
    for (int k = 0; k < 12; ++k) {
      u.push_back(u.back() + 0.01 + rng.uniform());
      // Mix of flat pieces and steep jumps.
      y.push_back(y.back() + (rng.uniform() < 0.3 ? 0.0 : std::pow(rng.uniform(), 4) * 10));
    }
    const MonotoneInterpolant f(u, y);
    double prev = f(u.front());
    for (int i = 1; i <= 2000; ++i) {
      const double v = f(u.back() * i / 2000.0);
      ASSERT_GE(v, prev - 1e-12) << trial;
      prev = v;
    }
  }
}

TEST(Interpolant, RejectsBadKnots) {
  EXPECT_THROW(MonotoneInterpolant({0.0}, {0.0}), std::invalid_argument);
  EXPECT_THROW(MonotoneInterpolant({0.0, 0.0}, {0.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(MonotoneInterpolant({0.0, 1.0}, {1.0, 0.0}), std::invalid_argument);
}

TEST(UpdateSchedule, EqualCostsAreAFixedPoint) {
  const DiscretisationSchedule d({0.0, 0.1, 0.35, 0.6, 1.0});
  const auto out = update_schedule(d, std::vector<double>(4, 0.7));
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_NEAR(out[i], d[i], 1e-15);
}

TEST(UpdateSchedule, KeepsEndpointsAndIsStrictlyIncreasing) {
  const auto d = DiscretisationSchedule::uniform(20);
  std::vector<double> costs(20);
  for (int i = 0; i < 20; ++i) costs[i] = std::exp(-0.5 * i);
  const auto out = update_schedule(d, costs);
  EXPECT_EQ(out[0], 0.0);
  EXPECT_EQ(out[20], 1.0);
  // Most of the length sits near t = 0, so the grid concentrates there.
  EXPECT_LT(out[10], 0.2);
}

TEST(UpdateSchedule, FlatPathIsReported) {
  EXPECT_THROW(update_schedule(DiscretisationSchedule::uniform(5), std::vector<double>(5, 0.0)), FlatPathError);
}

TEST(UpdateSchedule, ZeroCostIntervalsCollapse) {
  const auto d = DiscretisationSchedule::uniform(4);
  const auto out = update_schedule(d, {0.0, 1.0, 0.0, 1.0}, Interpolation::Linear);
  // Knots (0, 0), (1, 0.5), (2, 1): each zero-cost run keeps its first knot.
  EXPECT_NEAR(out[1], 0.25, 1e-15);
  EXPECT_NEAR(out[2], 0.5, 1e-15);
  EXPECT_NEAR(out[3], 0.75, 1e-15);
  // A zero-cost run touching t_T keeps t_T instead: knots (0, 0), (1, 0.25), (2, 1).
  const auto tail = update_schedule(d, {1.0, 1.0, 0.0, 0.0}, Interpolation::Linear);
  EXPECT_NEAR(tail[1], 0.125, 1e-15);
  EXPECT_NEAR(tail[2], 0.25, 1e-15);
  EXPECT_NEAR(tail[3], 0.625, 1e-15);
}

TEST(UpdateSchedule, RejectsInvalidCosts) {
  const auto d = DiscretisationSchedule::uniform(3);
  EXPECT_THROW(update_schedule(d, {1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(update_schedule(d, {1.0, -1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(update_schedule(d, {1.0, NAN, 1.0}), std::invalid_argument);
}

TEST(LengthEnergy, JensenAndEquality) {
  const auto le = length_energy({1.0, 4.0, 9.0});
  EXPECT_EQ(le.length, 6.0);
  EXPECT_EQ(le.energy, 42.0);
  EXPECT_GE(le.energy, le.length * le.length);
  const auto eq = length_energy({2.0, 2.0, 2.0, 2.0});
  EXPECT_NEAR(eq.energy / (eq.length * eq.length), 1.0, 1e-15);
}

TEST(Mix, Examples) {
  const DiscretisationSchedule cur({0.0, 0.5, 1.0});
  const DiscretisationSchedule tgt({0.0, 0.25, 1.0});
  EXPECT_NEAR(mix_schedules(cur, tgt, 0.1)[1], 0.475, 1e-15);
  EXPECT_EQ(mix_schedules(cur, tgt, 0.0), cur);
  EXPECT_EQ(mix_schedules(cur, tgt, 1.0), tgt);
  EXPECT_THROW(mix_schedules(cur, tgt, 1.5), std::invalid_argument);
  EXPECT_THROW(mix_schedules(cur, DiscretisationSchedule::uniform(3), 0.5), std::invalid_argument);
}

TEST(Optimize, StationaryTargetReportsFlatPath) {
  const auto src = ScoreSource::oracle(DiffusedGmm(standard_normal_target(), NoiseSchedule{}));
  OptimizeOptions opts;
  opts.n_samples = 64;
  const auto res = optimize_schedule(src, DiscretisationSchedule::uniform(10), oracle_sampler(*src.target()), opts, 1);
  EXPECT_TRUE(res.flat_path);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.schedule, DiscretisationSchedule::uniform(10));
}

TEST(Optimize, ConvergesAndEqualisesCosts) {
  const auto src = ScoreSource::oracle(DiffusedGmm(gaussian_target(0.0, 0.01), NoiseSchedule{}));
  OptimizeOptions opts;
  opts.n_samples = 1024;
  opts.tolerance = 1e-5;
  const auto res = optimize_schedule(src, DiscretisationSchedule::uniform(10), oracle_sampler(*src.target()), opts, 2);
  ASSERT_TRUE(res.converged);
  const double e = res.last_profile.energy();
  const double l = res.last_profile.length();
  EXPECT_GE(e / (l * l), 1.0);
  EXPECT_LE(e / (l * l), 1.02);
  ASSERT_GE(res.history.size(), 2u);
  EXPECT_LE(res.history.back().energy, res.history.front().energy);
}
