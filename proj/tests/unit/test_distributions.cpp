#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "sae/distributions.hpp"
#include "sae/error.hpp"
#include "unit/oracles.hpp"

using sae::RngStream;
using sae::SkewNormalSpec;
namespace ot = sae::testing;

namespace {

struct Moments {
  double mean;
  double variance;
  double skewness;
};

// Moments by direct quadrature of the density; no closed forms involved.
Moments integrate_moments(double xi, double omega, double shape) {
  auto pdf = [&](double x) { return ot::skew_normal_pdf(x, xi, omega, shape); };
  const double lo = xi - 12 * omega;
  const double hi = xi + 12 * omega;
  const double m = ot::simpson([&](double x) { return x * pdf(x); }, lo, hi);
  const double v = ot::simpson([&](double x) { return (x - m) * (x - m) * pdf(x); }, lo, hi);
  const double t = ot::simpson([&](double x) { return std::pow(x - m, 3) * pdf(x); }, lo, hi);
  return {m, v, t / std::pow(v, 1.5)};
}

}  // namespace

TEST(SkewNormal, ShapeZeroIsNormal) {
  SkewNormalSpec s(0.0, 0.5);
  EXPECT_EQ(s.delta(), 0.0);
  EXPECT_EQ(s.location(), 0.0);
  EXPECT_DOUBLE_EQ(s.scale(), 0.5);
  RngStream r(1);
  std::vector<double> x = sae::sample_skew_normal(s, 100000, r);
  EXPECT_NEAR(ot::sample_mean(x), 0.0, 0.006);
  EXPECT_NEAR(ot::sample_sd(x), 0.5, 0.005);
}

TEST(SkewNormal, UnitShapeParametersMatchQuadrature) {
  SkewNormalSpec s(1.0, 0.25);
  EXPECT_NEAR(s.delta(), 1.0 / std::numbers::sqrt2, 1e-15);
  // Oracle: solve for the scale that gives variance 0.0625 with the density integrated numerically.
  double lo = 0.1;
  double hi = 1.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (integrate_moments(0.0, mid, 1.0).variance < 0.0625 ? lo : hi) = mid;
  }
  const double omega = 0.5 * (lo + hi);
  const double xi = -integrate_moments(0.0, omega, 1.0).mean;
  EXPECT_NEAR(s.scale(), omega, 1e-8);
  EXPECT_NEAR(s.location(), xi, 1e-8);
  EXPECT_NEAR(s.scale(), 0.302793, 1e-6);
  EXPECT_NEAR(s.location(), -0.170833, 1e-6);

  RngStream r(2);
  std::vector<double> x = sae::sample_skew_normal(s, 200000, r);
  EXPECT_NEAR(ot::sample_mean(x), 0.0, 5 * 0.25 / std::sqrt(2e5));
  EXPECT_NEAR(ot::sample_sd(x), 0.25, 0.003);
}

TEST(SkewNormal, CalibrationIdentityOverShapeGrid) {
  for (double shape = -10.0; shape <= 10.0; shape += 0.25) {
    for (double sd : {0.1, 0.25, 0.5, 2.0}) {
      SkewNormalSpec s(shape, sd);
      EXPECT_NEAR(s.mean(), 0.0, 1e-12) << shape;
      EXPECT_NEAR(s.variance(), sd * sd, 1e-12) << shape;
    }
  }
}

TEST(SkewNormal, ClosedFormMomentsAgreeWithQuadrature) {
  for (double shape : {-5.0, -1.0, 0.5, 3.0, 8.0}) {
    SkewNormalSpec s(shape, 0.5);
    const Moments m = integrate_moments(s.location(), s.scale(), shape);
    EXPECT_NEAR(m.mean, 0.0, 1e-9) << shape;
    EXPECT_NEAR(m.variance, 0.25, 1e-9) << shape;
    EXPECT_NEAR(m.skewness, s.skewness(), 1e-7) << shape;
  }
}

TEST(SkewNormal, ShapeThreeSkewness) {
  SkewNormalSpec s(3.0, 0.5);
  EXPECT_NEAR(s.skewness(), 0.667024, 1e-6);
  RngStream r(3);
  std::vector<double> x = sae::sample_skew_normal(s, 200000, r);
  EXPECT_NEAR(ot::sample_skewness(x), 0.667, 0.03);
  EXPECT_NEAR(ot::sample_mean(x), 0.0, 0.005);
  EXPECT_NEAR(ot::sample_sd(x), 0.5, 0.005);
}

TEST(SkewNormal, NegativeShapeMirrors) {
  SkewNormalSpec pos(2.0, 1.0);
  SkewNormalSpec neg(-2.0, 1.0);
  EXPECT_DOUBLE_EQ(pos.scale(), neg.scale());
  EXPECT_DOUBLE_EQ(pos.location(), -neg.location());
  EXPECT_DOUBLE_EQ(pos.skewness(), -neg.skewness());
}

TEST(SkewNormal, KolmogorovSmirnovAgainstIntegratedCdf) {
  SkewNormalSpec s(3.0, 0.5);
  const double xi = s.location();
  const double omega = s.scale();
  ot::TabulatedCdf cdf([&](double x) { return ot::skew_normal_pdf(x, xi, omega, 3.0); }, xi - 10 * omega,
                       xi + 10 * omega);
  RngStream r(4);
  std::vector<double> x = sae::sample_skew_normal(s, 100000, r);
  const double d = ot::ks_statistic(x, [&](double v) { return cdf(v); });
  const double p = ot::kolmogorov_sf(d * std::sqrt(1e5));
  EXPECT_GT(p, 1e-3) << "D = " << d;
}

TEST(SkewNormal, RejectsBadSd) {
  EXPECT_THROW(SkewNormalSpec(1.0, 0.0), sae::InvalidParameter);
  EXPECT_THROW(SkewNormalSpec(1.0, -1.0), sae::InvalidParameter);
  EXPECT_THROW(SkewNormalSpec(1.0, std::nan("")), sae::InvalidParameter);
}

TEST(Mvn, ZeroCovarianceReturnsMean) {
  Eigen::VectorXd mean(3);
  mean << 1.0, -2.0, 0.5;
  RngStream r(5);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd x = sae::sample_mvn(mean, Eigen::MatrixXd::Zero(3, 3), r);
    EXPECT_EQ(x, mean);
  }
}

TEST(Mvn, SampleCovarianceMatches) {
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 2.0, 2.0, 3.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  sae::MvnFactor f(cov);
  EXPECT_LT((f.lower() * f.lower().transpose() - cov).norm(), 1e-12);
  RngStream r(6);
  const int n = 100000;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(2, 2);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x = f.draw(mean, r);
    acc += x * x.transpose();
    sum += x;
  }
  acc /= n;
  EXPECT_LT(sum.norm() / n, 0.03);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(acc(i, j), cov(i, j), 0.02 * cov(i, j)) << i << j;
}

TEST(Mvn, RankDeficientPsd) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 1.0, 1.0, 1.0;
  sae::MvnFactor f(cov);
  EXPECT_LT((f.lower() * f.lower().transpose() - cov).norm(), 1e-9);
  RngStream r(7);
  Eigen::VectorXd x = f.draw(Eigen::VectorXd::Zero(2), r);
  EXPECT_NEAR(x(0), x(1), 1e-6);
}

TEST(Mvn, IndefiniteThrows) {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 3.0, 3.0, 1.0;
  EXPECT_THROW(sae::MvnFactor{cov}, sae::NumericError);
}

TEST(Empirical, DrawsOnlyPoolValuesUniformly) {
  const std::vector<double> pool{1.5, -2.0, 7.0};
  RngStream r(8);
  auto x = sae::empirical_draw(pool, 30000, r);
  int counts[3] = {0, 0, 0};
  for (double v : x) {
    if (v == 1.5) ++counts[0];
    else if (v == -2.0) ++counts[1];
    else if (v == 7.0) ++counts[2];
    else FAIL() << v;
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(Empirical, SingletonPool) {
  const std::vector<double> pool{3.25};
  RngStream r(9);
  for (double v : sae::empirical_draw(pool, 100, r)) EXPECT_EQ(v, 3.25);
}

TEST(Empirical, EmptyPoolThrows) {
  RngStream r(10);
  EXPECT_THROW(sae::empirical_draw(std::span<const double>{}, 5, r), sae::InvalidInput);
}

TEST(Bernoulli, Tails) {
  RngStream r(11);
  int ones = 0;
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(sae::sample_bernoulli(0.0, r), 0);
    EXPECT_EQ(sae::sample_bernoulli(1.0, r), 1);
  }
  for (int i = 0; i < 100000; ++i) ones += sae::sample_bernoulli(0.3, r);
  EXPECT_NEAR(ones / 1e5, 0.3, 0.006);
  EXPECT_THROW(sae::sample_bernoulli(1.1, r), sae::InvalidParameter);
  EXPECT_THROW(sae::sample_bernoulli(-0.1, r), sae::InvalidParameter);
}
