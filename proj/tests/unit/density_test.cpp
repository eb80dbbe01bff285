#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "rlg/core/random.hpp"
#include "rlg/density/log_density.hpp"
#include "rlg/density/mixture.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/density/tilt.hpp"
#include "rlg/error.hpp"

using namespace rlg;
using rlg::testing::two_mode_mixture;

namespace {

double normal_pdf(double x, double mu, double var) {
  return std::exp(-0.5 * (x - mu) * (x - mu) / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

GaussianMixture symmetric(double a) {
  return GaussianMixture({{0.5, Point{-a}, Point{1.0}}, {0.5, Point{a}, Point{1.0}}});
}

}  // namespace

TEST(Mixture, StandardNormalLogPdf) {
  EXPECT_NEAR(mixture_log_pdf(GaussianMixture::standard_normal(), Point{0.0}), -0.5 * std::log(2 * std::numbers::pi),
              1e-15);
  EXPECT_NEAR(mixture_log_pdf(GaussianMixture::standard_normal(), Point{0.0}), -0.918939, 1e-6);
}

TEST(Mixture, TwoModeMixtureLogPdf) {
  const double expect = std::log(0.7 * normal_pdf(-2.5, -2.5, 0.25) + 0.3 * normal_pdf(-2.5, 2.5, 0.49));
  EXPECT_NEAR(mixture_log_pdf(two_mode_mixture(), Point{-2.5}), expect, 1e-13);
  double integral = 0.0;
  const double h = 1e-3;
  for (double x = -12.0; x <= 12.0; x += h) integral += two_mode_mixture().pdf(Point{x}) * h;
  EXPECT_NEAR(integral, 1.0, 1e-6);
}

TEST(Mixture, FarTailIsFinite) {
  EXPECT_TRUE(std::isfinite(mixture_log_pdf(two_mode_mixture(), Point{80.0})));
  EXPECT_TRUE(std::isfinite(mixture_score(two_mode_mixture(), Point{-80.0})[0]));
}

TEST(Mixture, Symmetry) {
  const auto m = symmetric(1.7);
  for (double x : {0.1, 0.9, 2.5, 6.0}) EXPECT_NEAR(mixture_log_pdf(m, Point{x}), mixture_log_pdf(m, Point{-x}), 1e-14);
  EXPECT_NEAR(mixture_score(m, Point{0.0})[0], 0.0, 1e-15);
}

TEST(Mixture, Score) {
  EXPECT_NEAR(mixture_score(GaussianMixture::standard_normal(), Point{1.3})[0], -1.3, 1e-15);
  const double h = 1e-5;
  const double fd =
      (mixture_log_pdf(two_mode_mixture(), Point{1.0 + h}) - mixture_log_pdf(two_mode_mixture(), Point{1.0 - h})) / (2 * h);
  EXPECT_NEAR(mixture_score(two_mode_mixture(), Point{1.0})[0], fd, 1e-7);
}

TEST(Mixture, TwoDimensionalScoreMatchesFiniteDifferences) {
  const GaussianMixture m({{0.4, Point{1.0, -1.0}, Point{0.5, 2.0}}, {0.6, Point{-1.0, 0.5}, Point{1.5, 0.3}}});
  const Point x{0.3, 0.2};
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Point xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    EXPECT_NEAR(mixture_score(m, x)[i], (mixture_log_pdf(m, xp) - mixture_log_pdf(m, xm)) / (2 * h), 1e-7);
  }
}

TEST(Mixture, SamplingStatistics) {
  const auto batch = mixture_sample(two_mode_mixture(), 100000, 123);
  std::size_t left = 0;
  for (double x : batch.values) left += x < 0.0;
  EXPECT_NEAR(static_cast<double>(left) / 1e5, 0.70, 0.01);

  const GaussianMixture shifted({{1.0, Point{3.0}, Point{1.0}}});
  const auto b2 = mixture_sample(shifted, 100000, 5);
  double mean = 0.0;
  for (double x : b2.values) mean += x;
  EXPECT_NEAR(mean / 1e5, 3.0, 0.02);
}

TEST(Mixture, SamplingIsDeterministic) {
  EXPECT_EQ(mixture_sample(two_mode_mixture(), 1000, 8).values, mixture_sample(two_mode_mixture(), 1000, 8).values);
  EXPECT_NE(mixture_sample(two_mode_mixture(), 1000, 8).values, mixture_sample(two_mode_mixture(), 1000, 9).values);
}

TEST(Mixture, Validation) {
  EXPECT_THROW(GaussianMixture({{0.5, Point{0.0}, Point{1.0}}}), Error);
  EXPECT_THROW(GaussianMixture({{1.0, Point{0.0}, Point{0.0}}}), Error);
  EXPECT_THROW(GaussianMixture({{0.5, Point{0.0}, Point{1.0}}, {0.5, Point{0.0, 1.0}, Point{1.0, 1.0}}}), Error);
  EXPECT_THROW(GaussianMixture({}), Error);
}

TEST(Tilt, ZeroTiltIsIdentity) {
  const auto t = tilt_mixture(two_mode_mixture(), Point{0.0});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_NEAR(t.components()[k].weight, two_mode_mixture().components()[k].weight, 1e-15);
    EXPECT_EQ(t.components()[k].mean[0], two_mode_mixture().components()[k].mean[0]);
  }
}

TEST(Tilt, StandardNormal) {
  const auto t = tilt_mixture(GaussianMixture::standard_normal(), Point{1.0});
  ASSERT_EQ(t.components().size(), 1u);
  EXPECT_DOUBLE_EQ(t.components()[0].mean[0], 1.0);
  EXPECT_DOUBLE_EQ(t.components()[0].variance[0], 1.0);
  EXPECT_DOUBLE_EQ(t.components()[0].weight, 1.0);
}

TEST(Tilt, TwoModeMixtureClosedForm) {
  const double lam = 0.1 / 0.3;
  const auto t = tilt_mixture(two_mode_mixture(), rlg::testing::linear_reward(), 0.3);
  const double w1 = 0.7 * std::exp(-2.5 * lam + 0.125 * lam * lam);
  const double w2 = 0.3 * std::exp(2.5 * lam + 0.245 * lam * lam);
  EXPECT_NEAR(t.components()[0].mean[0], -2.5 + 0.25 * lam, 1e-14);
  EXPECT_NEAR(t.components()[1].mean[0], 2.5 + 0.49 * lam, 1e-14);
  EXPECT_NEAR(t.components()[0].weight, w1 / (w1 + w2), 1e-14);
  EXPECT_NEAR(t.components()[1].weight, w2 / (w1 + w2), 1e-14);
  EXPECT_EQ(t.components()[0].variance[0], 0.25);
}

TEST(Tilt, AgreesWithQuadrature) {
  for (double lam : {0.05, 1.0 / 3.0, 2.0 / 3.0}) {
    const auto reward = RewardFn::linear(Point{lam});
    const auto table = quadrature_tilt(two_mode_mixture(), reward, 1.0);
    EXPECT_LE(total_variation(table, tilt_mixture(two_mode_mixture(), Point{lam})), 1e-6) << "lambda " << lam;
  }
}

TEST(Tilt, RejectsNonLinearRewardInClosedForm) {
  const auto quad = RewardFn::quadratic(Point{0.0}, Point{-0.5});
  try {
    tilt_mixture(two_mode_mixture(), quad, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedReward);
  }
}

TEST(Quadrature, ZeroRewardTabulatesBase) {
  const auto table = quadrature_tilt(two_mode_mixture(), RewardFn::linear(Point{0.0}), 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < table.xs().size(); ++i)
    worst = std::max(worst, std::abs(table.density()[i] - two_mode_mixture().pdf(Point{table.xs()[i]})));
  EXPECT_LE(worst, 1e-8);
}

TEST(Quadrature, QuadraticRewardCompletesTheSquare) {
  // N(0,1) * exp(-x^2 / 2) is proportional to N(0, 1/2).
  const auto table = quadrature_tilt(GaussianMixture::standard_normal(), RewardFn::quadratic(Point{0.0}, Point{-0.5}), 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < table.xs().size(); ++i)
    worst = std::max(worst, std::abs(table.density()[i] - normal_pdf(table.xs()[i], 0.0, 0.5)));
  EXPECT_LE(worst, 1e-8);
  EXPECT_NEAR(table.cdf(0.0), 0.5, 1e-9);
}

TEST(Quadrature, GridRequirements) {
  Grid1D narrow{-5.0, 5.0, 8192};
  EXPECT_THROW(quadrature_tilt(two_mode_mixture(), rlg::testing::linear_reward(), 0.3, narrow), Error);
  Grid1D coarse{-10.0, 10.0, 100};
  EXPECT_THROW(quadrature_tilt(two_mode_mixture(), rlg::testing::linear_reward(), 0.3, coarse), Error);
}

TEST(Reward, Kinds) {
  const auto lin = RewardFn::linear(Point{0.1});
  EXPECT_DOUBLE_EQ(lin(Point{3.0}), 0.3);
  EXPECT_DOUBLE_EQ(lin.gradient(Point{-7.0})[0], 0.1);
  const auto quad = RewardFn::quadratic(Point{1.0, 0.0}, Point{0.0, -2.0});
  EXPECT_DOUBLE_EQ(quad(Point{2.0, 3.0}), 2.0 - 18.0);
  EXPECT_DOUBLE_EQ(quad.gradient(Point{2.0, 3.0})[1], -12.0);
  const auto tab = RewardFn::table({0.0, 1.0, 2.0}, {0.0, 10.0, 0.0});
  EXPECT_DOUBLE_EQ(tab(Point{0.5}), 5.0);
  EXPECT_DOUBLE_EQ(tab(Point{-4.0}), 0.0);
  EXPECT_DOUBLE_EQ(tab(Point{1.5}), 5.0);
  EXPECT_THROW(RewardFn::table({0.0, 0.0}, {1.0, 2.0}), Error);
}

TEST(GaussianPathOracle, MatchesClosedFormScoreAndVelocity) {
  const GaussianPath path(Point{0.5}, Point{2.0}, Schedule{});
  for (double t : {0.1, 0.5, 0.9})
    for (double x : {-2.0, 0.0, 1.5}) {
      const Point p{x};
      const double mvar = (1 - t) * (1 - t) * 2.0 + t * t;
      EXPECT_NEAR(path.score(p, t)[0], -(x - (1 - t) * 0.5) / mvar, 1e-12);
      // velocity and score agree through the schedule's affine relation
      const Point s = velocity_to_score(path.velocity(p, t), p, t, Schedule{});
      EXPECT_NEAR(s[0], path.score(p, t)[0], 1e-8);
      EXPECT_NEAR(path.log_pdf(p, t), std::log(normal_pdf(x, (1 - t) * 0.5, mvar)), 1e-12);
    }
}

TEST(GaussianPathOracle, VariancePreservingConversion) {
  const Schedule vp(ScheduleKind::VariancePreserving);
  const GaussianPath path(Point{0.0, 1.0}, Point{1.0, 0.3}, vp);
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const double t = 0.01 + 0.98 * rng.uniform();
    const Point x{rng.normal(), rng.normal()};
    const Point s = velocity_to_score(path.velocity(x, t), x, t, vp);
    const Point v = score_to_velocity(path.score(x, t), x, t, vp);
    for (int k = 0; k < 2; ++k) {
      EXPECT_NEAR(s[k], path.score(x, t)[k], 1e-8);
      EXPECT_NEAR(v[k], path.velocity(x, t)[k], 1e-8);
    }
  }
}

TEST(LogDensity, StandardNormalOracleAtZero) {
  const GaussianPath path(Point{0.0}, Point{1.0}, Schedule{});
  LogDensityOptions opts;
  opts.steps = 1000;
  const std::vector<double> xs{0.0};
  const auto lp = field_log_density(1, path, xs, opts);
  EXPECT_NEAR(lp[0], -0.5 * std::log(2 * std::numbers::pi), 1e-4);
}

TEST(LogDensity, NonTrivialOracleMatchesClosedForm) {
  const GaussianPath path(Point{1.5, -0.5}, Point{0.2, 3.0}, Schedule{});
  LogDensityOptions opts;
  opts.steps = 1000;
  std::vector<double> xs;
  Rng rng(12);
  for (int i = 0; i < 40; ++i) xs.push_back(2.0 * rng.normal());
  const auto lp = field_log_density(2, path, xs, opts);
  for (std::size_t s = 0; s < lp.size(); ++s)
    EXPECT_NEAR(lp[s], path.log_pdf(Point{xs[2 * s], xs[2 * s + 1]}, 0.0), 1e-4);
  opts.t_start = 0.4;
  const auto lp_mid = field_log_density(2, path, xs, opts);
  for (std::size_t s = 0; s < lp.size(); ++s)
    EXPECT_NEAR(lp_mid[s], path.log_pdf(Point{xs[2 * s], xs[2 * s + 1]}, 0.4), 1e-4);
}

TEST(LogDensity, OptionValidation) {
  const auto m = VelocityModel::glorot(1, {4}, 1);
  const std::vector<double> xs{0.0};
  LogDensityOptions few;
  few.steps = 10;
  EXPECT_THROW(model_log_density(m, xs, Schedule{}, few), Error);
  const std::vector<double> bad{NAN};
  EXPECT_THROW(model_log_density(m, bad, Schedule{}), Error);
}

TEST(LogDensity, GradientMatchesFiniteDifferences) {
  auto m = VelocityModel::glorot(1, {8, 8}, 21);
  const std::vector<double> xs{-1.0, 0.3, 2.0}, weights{0.5, -1.0, 2.0};
  LogDensityOptions opts;
  opts.steps = 100;
  std::vector<double> g(m.parameter_count(), 0.0);
  const auto lp = model_log_density_with_grad(m, xs, Schedule{}, opts, weights, g);
  const auto plain = model_log_density(m, xs, Schedule{}, opts);
  for (std::size_t s = 0; s < xs.size(); ++s) EXPECT_EQ(lp[s], plain[s]);
  auto objective = [&](const VelocityModel& mm) {
    const auto v = model_log_density(mm, xs, Schedule{}, opts);
    double f = 0.0;
    for (std::size_t s = 0; s < v.size(); ++s) f += weights[s] * v[s];
    return f;
  };
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m.parameter_count()));
    const double h = 1e-5, keep = m.parameters()[k];
    m.parameters()[k] = keep + h;
    const double fp = objective(m);
    m.parameters()[k] = keep - h;
    const double fm = objective(m);
    m.parameters()[k] = keep;
    const double fd = (fp - fm) / (2 * h);
    EXPECT_NEAR(g[k], fd, 1e-4 * std::max(1.0, std::abs(fd))) << "param " << k;
  }
}

TEST(ImplicitReward, IdenticalModelsGiveZero) {
  const auto m = VelocityModel::glorot(1, {8}, 4);
  for (double x : {-3.0, 0.0, 2.0}) EXPECT_EQ(implicit_reward(m, m, Point{x}, 0.0, 0.3, Schedule{}), 0.0);
}

TEST(ImplicitReward, LinearInBeta) {
  const auto a = VelocityModel::glorot(1, {8}, 4), b = VelocityModel::glorot(1, {8}, 5);
  const double r1 = implicit_reward(a, b, Point{0.7}, 0.0, 0.3, Schedule{});
  const double r2 = implicit_reward(a, b, Point{0.7}, 0.0, 0.6, Schedule{});
  EXPECT_NEAR(r2, 2.0 * r1, 1e-14 * std::max(1.0, std::abs(r1)));
}

TEST(TrainedDensity, IntegratesToOne) {
  const auto& ref = rlg::testing::reference_model();
  std::vector<double> xs;
  for (int i = 0; i <= 320; ++i) xs.push_back(-8.0 + 0.05 * i);
  const auto lp = model_log_density(ref, xs, Schedule{});
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) integral += 0.5 * (std::exp(lp[i]) + std::exp(lp[i + 1])) * 0.05;
  EXPECT_NEAR(integral, 1.0, 0.02);
}

TEST(TrainedDensity, CloseToAnalyticMixtureInTotalVariation) {
  const auto& ref = rlg::testing::reference_model();
  std::vector<double> xs;
  for (int i = 0; i <= 320; ++i) xs.push_back(-8.0 + 0.05 * i);
  const auto lp = model_log_density(ref, xs, Schedule{});
  std::vector<double> gap(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    gap[i] = std::abs(std::exp(lp[i]) - two_mode_mixture().pdf(Point{xs[i]}));
  double tv = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) tv += 0.25 * (gap[i] + gap[i + 1]) * 0.05;
  RecordProperty("total_variation", std::to_string(tv));
  EXPECT_LE(tv, 0.05);
}
