#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "paisc/distribution.hpp"
#include "paisc/estimators.hpp"

using namespace paisc;

namespace {

// Integral of the density over [a, b] clipped to the support, where the
// density is smooth.
double integrate(const Univariate& u, double a, double b) {
  double lo = -std::numeric_limits<double>::infinity(), hi = -lo;
  if (const auto* t = std::get_if<TruncatedGaussian>(&u)) lo = t->lo, hi = t->hi;
  if (const auto* t = std::get_if<Uniform>(&u)) lo = t->lo, hi = t->hi;
  a = std::max(a, lo);
  b = std::min(b, hi);
  if (a >= b) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return std::exp(log_pdf(u, x)); }, a, b, 12, 1e-12);
}

std::vector<Univariate> families() {
  return {Gaussian{0.3, 1.7}, StudentT{2.0, -1.0, 0.5}, StudentT{7.5, 0.0, 2.0},
          TruncatedGaussian{1.0, 2.0, -0.5, 4.0}, Uniform{-2.0, 3.0}};
}

}  // namespace

TEST(Univariate, DensityIntegratesToOne) {
  for (const auto& u : families()) {
    const double total = integrate(u, -std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity());
    EXPECT_NEAR(total, 1.0, 1e-6) << to_string(u);
  }
}

TEST(Univariate, CdfMatchesIntegratedDensity) {
  for (const auto& u : families()) {
    for (double t : {-1.0, 0.0, 0.7, 2.5}) {
      const double lo = -std::numeric_limits<double>::infinity();
      const double f = integrate(u, lo, t);
      EXPECT_NEAR(cdf(u, t), f, 1e-7) << to_string(u) << " at " << t;
    }
  }
}

TEST(Univariate, GaussianMassOnZeroTwo) {
  const double oracle = 0.5 * (std::erf(2.0 / std::sqrt(2.0)) - std::erf(0.0));
  EXPECT_NEAR(interval_mass(Gaussian{0, 1}, 0, 2), oracle, 1e-14);
  EXPECT_NEAR(oracle, 0.47725, 1e-5);
}

TEST(Univariate, FarTailMassKeepsPrecision) {
  // 1 - Phi(10) ~ 7.62e-24 would round to zero computed as a cdf difference.
  const double m = interval_mass(Gaussian{0, 1}, 10, 11);
  EXPECT_GT(m, 7e-24);
  EXPECT_LT(m, 8e-24);
}

TEST(Univariate, GradientMatchesFiniteDifference) {
  RngStream rng(1, 0);
  for (const auto& u : families()) {
    for (int i = 0; i < 50; ++i) {
      const double x = sample(u, rng);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      const double fd = (log_pdf(u, x + h) - log_pdf(u, x - h)) / (2 * h);
      EXPECT_NEAR(dlog_pdf(u, x), fd, 1e-5 * std::max(1.0, std::abs(fd))) << to_string(u);
    }
  }
}

TEST(Univariate, GradientOutsideSupportThrows) {
  EXPECT_THROW(dlog_pdf(Uniform{0, 1}, 2.0), SupportError);
  EXPECT_THROW(dlog_pdf(Uniform{0, 1}, 1.0), SupportError);
  EXPECT_THROW(dlog_pdf(TruncatedGaussian{0, 1, -1, 1}, -3.0), SupportError);
  EXPECT_EQ(log_pdf(Uniform{0, 1}, 2.0), -std::numeric_limits<double>::infinity());
}

TEST(Univariate, InvalidParameters) {
  EXPECT_THROW(validate(Gaussian{0, 0}), ConfigError);
  EXPECT_THROW(validate(StudentT{-1, 0, 1}), ConfigError);
  EXPECT_THROW(validate(Uniform{1, 1}), ConfigError);
  EXPECT_THROW(validate(TruncatedGaussian{0, 1, 2, 1}), ConfigError);
}

TEST(Univariate, TruncatedSamplingStaysInsideAndMatchesMean) {
  RngStream rng(2, 0);
  const Gaussian g{0, 1};
  RunningStats s;
  for (int i = 0; i < 20000; ++i) {
    const double x = sample_truncated(g, 5, 6, rng);
    ASSERT_GE(x, 5.0);
    ASSERT_LE(x, 6.0);
    s.add(x);
  }
  // Mean of N(0,1) truncated to [a,b]: (phi(a) - phi(b)) / (Phi(b) - Phi(a)).
  auto phi = [](double t) { return std::exp(-0.5 * t * t) / std::sqrt(2 * M_PI); };
  const double mass = 0.5 * (std::erfc(5 / std::sqrt(2.0)) - std::erfc(6 / std::sqrt(2.0)));
  EXPECT_NEAR(s.mean(), (phi(5) - phi(6)) / mass, 3e-3);
  EXPECT_THROW(sample_truncated(g, 60, 61, rng), Error);
}

TEST(Univariate, SamplingMoments) {
  RngStream rng(4, 0);
  for (const auto& u : {Univariate{Gaussian{1, 2}}, Univariate{Uniform{-1, 3}}, Univariate{StudentT{5, 1, 2}}}) {
    RunningStats s;
    for (int i = 0; i < 200000; ++i) s.add(sample(u, rng));
    const double var = *variance(u);
    EXPECT_NEAR(s.mean(), 1.0, 5 * std::sqrt(var / 200000)) << to_string(u);
    EXPECT_NEAR(s.sample_variance() / var, 1.0, 0.05) << to_string(u);
  }
  EXPECT_FALSE(variance(StudentT{2, 0, 1}).has_value());
}

TEST(Distribution, MultivariateGaussianDensity) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  const Distribution p(MultivariateGaussian{Eigen::Vector2d(1, -1), cov});
  const Eigen::Vector2d x(0.3, 0.4);
  const Eigen::Vector2d d = x - Eigen::Vector2d(1, -1);
  const double direct = -0.5 * d.dot(cov.inverse() * d) - std::log(2 * M_PI) - 0.5 * std::log(cov.determinant());
  EXPECT_NEAR(p.log_pdf(std::vector<double>{0.3, 0.4}), direct, 1e-12);

  RngStream rng(5, 0);
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd s = p.sample(rng) - Eigen::Vector2d(1, -1);
    acc += s * s.transpose();
  }
  EXPECT_LT(((acc / n) - cov).cwiseAbs().maxCoeff(), 0.01);
  const CovarianceEstimate c = p.covariance(rng);
  EXPECT_EQ(c.samples_used, 0u);
  EXPECT_TRUE(c.cov.isApprox(cov));
  EXPECT_THROW(p.marginals(), NotApplicableError);
}

TEST(Distribution, NonPositiveDefiniteCovarianceRejected) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.1, 0.1, 0.1, 0.2;  // fine
  EXPECT_NO_THROW(Distribution(MultivariateGaussian{Eigen::Vector2d(0, 0), cov}));
  cov << 0.1, 0.3, 0.3, 0.2;
  EXPECT_THROW(Distribution(MultivariateGaussian{Eigen::Vector2d(0, 0), cov}), ConfigError);
}

TEST(Distribution, ChainLogDensityIsSumOfConditionals) {
  const Distribution p(FactorizedChain{{{StudentT{2, 0, 0.5}, -1}, {Gaussian{0, 0.5}, 0}, {Gaussian{0, 0.5}, 0}}});
  const std::vector<double> x{1.2, 0.7, 1.9};
  const double expected = log_pdf(StudentT{2, 0, 0.5}, 1.2) + log_pdf(Gaussian{1.2, 0.5}, 0.7) +
                          log_pdf(Gaussian{1.2, 0.5}, 1.9);
  EXPECT_NEAR(p.log_pdf(x), expected, 1e-12);
  EXPECT_FALSE(p.is_independent());
  RngStream rng(6, 0);
  const CovarianceEstimate c = p.covariance(rng);
  EXPECT_EQ(c.samples_used, Distribution::kCovarianceSamples);
  EXPECT_THROW(Distribution(FactorizedChain{{{Gaussian{0, 1}, 1}, {Gaussian{0, 1}, -1}}}), ConfigError);
}

TEST(Distribution, IndependentCovariance) {
  const Distribution p(IndependentProduct{{Gaussian{0, 2}, Uniform{0, 6}}});
  RngStream rng(7, 0);
  const CovarianceEstimate c = p.covariance(rng);
  EXPECT_EQ(c.samples_used, 0u);
  EXPECT_NEAR(c.cov(0, 0), 4.0, 1e-12);
  EXPECT_NEAR(c.cov(1, 1), 3.0, 1e-12);
  EXPECT_EQ(c.cov(0, 1), 0.0);
  const Distribution t(IndependentProduct{{StudentT{2, 0, 1}}});
  EXPECT_EQ(t.covariance(rng).samples_used, Distribution::kCovarianceSamples);
}

TEST(Distribution, JointGradientMatchesFiniteDifference) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  const std::vector<Distribution> ps{
      Distribution(IndependentProduct{{Gaussian{0, 1}, StudentT{3, 1, 2}}}),
      Distribution(MultivariateGaussian{Eigen::Vector2d(0.5, 0), cov}),
      Distribution(FactorizedChain{{{StudentT{2, 0, 0.5}, -1}, {Gaussian{0, 0.5}, 0}}})};
  RngStream rng(8, 0);
  for (const auto& p : ps) {
    for (int i = 0; i < 20; ++i) {
      Eigen::VectorXd x = p.sample(rng);
      const Eigen::VectorXd g = p.grad_log_pdf(std::span<const double>(x.data(), 2));
      for (int k = 0; k < 2; ++k) {
        Eigen::VectorXd a = x, b = x;
        const double h = 1e-6 * std::max(1.0, std::abs(x[k]));
        a[k] += h;
        b[k] -= h;
        const double fd = (p.log_pdf(std::span<const double>(a.data(), 2)) -
                           p.log_pdf(std::span<const double>(b.data(), 2))) / (2 * h);
        EXPECT_NEAR(g[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }
}
