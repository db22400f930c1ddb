#include <gtest/gtest.h>

#include <cmath>

#include "paisc/bench.hpp"
#include "paisc/estimators.hpp"
#include "paisc/paving.hpp"

using namespace paisc;

namespace {

Constraint circle() { return parse_constraint("x*x + y*y <= 1", "x -2 2\ny -2 2"); }
Distribution uniform_square() { return Distribution(IndependentProduct{{Uniform{-2, 2}, Uniform{-2, 2}}}); }

}  // namespace

TEST(Dmc, Tautology) {
  const auto r = dmc_estimate(parse_constraint("x <= x", "x -1 1"),
                              Distribution(IndependentProduct{{Gaussian{0, 1}}}), 1000, RngStream(1, 0));
  EXPECT_EQ(r.mean, 1.0);
  EXPECT_EQ(r.variance, 0.0);
  EXPECT_EQ(r.n_samples, 1000u);
}

TEST(Dmc, Infeasible) {
  const auto r = dmc_estimate(parse_constraint("x^2 <= -1", "x -1 1"),
                              Distribution(IndependentProduct{{Gaussian{0, 1}}}), 1000, RngStream(1, 0));
  EXPECT_EQ(r.mean, 0.0);
}

TEST(Dmc, CircleAreaRatio) {
  const auto r = dmc_estimate(circle(), uniform_square(), 1'000'000, RngStream(2, 0));
  const double truth = M_PI / 16;
  EXPECT_NEAR(r.mean, truth, 3 * std::sqrt(truth * (1 - truth) / 1e6));
  EXPECT_NEAR(r.variance, r.mean * (1 - r.mean) / 1e6, 1e-15);
}

TEST(Dmc, ThreadCountDoesNotChangeResult) {
  const auto a = dmc_estimate(circle(), uniform_square(), 100'000, RngStream(3, 0), 1);
  const auto b = dmc_estimate(circle(), uniform_square(), 100'000, RngStream(3, 0), 4);
  EXPECT_EQ(a.mean, b.mean);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_GT(a.trace[i].samples_used, a.trace[i - 1].samples_used);
  EXPECT_EQ(a.trace.back().samples_used, 100'000u);
}

TEST(Dmc, ZeroBudgetRejected) {
  EXPECT_THROW(dmc_estimate(circle(), uniform_square(), 0, RngStream(1, 0)), ConfigError);
}

TEST(BoxMass, Examples) {
  const Distribution p(IndependentProduct{{Gaussian{0, 1}, Gaussian{0, 1}}});
  EXPECT_NEAR(box_mass(p, Box({{-10, 10}, {-10, 10}})), 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(box_mass(uniform_square(), Box({{-2, 0}, {-2, 0}})), 0.25);
  const Distribution u01(IndependentProduct{{Uniform{0, 1}, Uniform{0, 1}}});
  EXPECT_DOUBLE_EQ(box_mass(u01, Box({{0, 0.5}, {0, 0.5}})), 0.25);
  const Distribution g(IndependentProduct{{Gaussian{0, 1}}});
  EXPECT_NEAR(box_mass(g, Box({{0, 2}})), 0.5 * std::erf(2 / std::sqrt(2.0)), 1e-14);
}

TEST(BoxMass, CorrelatedInputsNotApplicable) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  const Distribution p(MultivariateGaussian{Eigen::Vector2d(0, 0), cov});
  EXPECT_THROW(box_mass(p, Box({{0, 1}, {0, 1}})), NotApplicableError);
  const Paving pv = pave(circle(), 0.1, 64);
  EXPECT_THROW(stratified_estimate(circle(), p, pv, 1000, RngStream(1, 0)), NotApplicableError);
}

TEST(Stratified, OnlyInnerBoxes) {
  const Constraint c = parse_constraint("x <= 1 && y <= 1", "x -2 2\ny -2 2");
  Paving pv;
  pv.inner = {Box({{-2, 1}, {-2, -1}}), Box({{-2, 1}, {-1, 1}})};
  pv.exhausted = true;
  const auto r = stratified_estimate(c, uniform_square(), pv, 1000, RngStream(1, 0));
  EXPECT_NEAR(r.mean, 0.75 * 0.75, 1e-12);
  EXPECT_EQ(r.variance, 0.0);
}

TEST(Stratified, Infeasible) {
  const Constraint c = parse_constraint("x^2 <= -1", "x -2 2\ny -2 2");
  const auto r = stratified_estimate(c, uniform_square(), pave(c, 0.01, 1024), 1000, RngStream(1, 0));
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.variance, 0.0);
}

TEST(Stratified, CircleAgreesWithDmcAndHasSmallerVariance) {
  const Paving pv = pave(circle(), 1e-2, 1024);
  const auto s = stratified_estimate(circle(), uniform_square(), pv, 100'000, RngStream(4, 0));
  const auto d = dmc_estimate(circle(), uniform_square(), 100'000, RngStream(5, 0));
  EXPECT_NEAR(s.mean, d.mean, 3 * std::sqrt(s.variance + d.variance));
  EXPECT_LT(s.variance, d.variance);
  EXPECT_NEAR(s.mean, M_PI / 16, 4 * std::sqrt(s.variance));
}

TEST(Stratified, VarianceNoLargerThanDmcOverRepetitions) {
  const Paving pv = pave(circle(), 1e-2, 1024);
  std::vector<double> sv, dv;
  for (int rep = 0; rep < 20; ++rep) {
    sv.push_back(stratified_estimate(circle(), uniform_square(), pv, 10'000, RngStream(100 + rep, 0)).variance);
    dv.push_back(dmc_estimate(circle(), uniform_square(), 10'000, RngStream(200 + rep, 0)).variance);
  }
  EXPECT_LE(median(sv), median(dv));
}

TEST(Stratified, ThreadCountDoesNotChangeResult) {
  const Paving pv = pave(circle(), 1e-2, 1024);
  const auto a = stratified_estimate(circle(), uniform_square(), pv, 50'000, RngStream(6, 0), 1);
  const auto b = stratified_estimate(circle(), uniform_square(), pv, 50'000, RngStream(6, 0), 3);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(Importance, ProposalEqualToInputOnTautologyGivesUnitWeights) {
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  const auto r = importance_estimate(parse_constraint("x <= x", "x -50 50"), p, p, 1000, RngStream(1, 0));
  EXPECT_DOUBLE_EQ(r.mean, 1.0);
  EXPECT_EQ(r.variance, 0.0);
}

TEST(Compose, DisjointSum) {
  EstimateReport a{0.2, 1e-4, 10, {}}, b{0.3, 2e-4, 20, {}};
  const std::vector<EstimateReport> one{a};
  EXPECT_EQ(compose_disjoint_sum(one).mean, 0.2);
  EXPECT_EQ(compose_disjoint_sum(one).variance, 1e-4);
  const std::vector<EstimateReport> ab{a, b}, ba{b, a};
  const auto r = compose_disjoint_sum(ab);
  EXPECT_DOUBLE_EQ(r.mean, 0.5);
  EXPECT_DOUBLE_EQ(r.variance, 3e-4);
  EXPECT_EQ(r.n_samples, 30u);
  EXPECT_EQ(compose_disjoint_sum(ba).mean, r.mean);
}

TEST(Compose, DisjointSumAssociative) {
  EstimateReport a{0.1, 1e-4, 1, {}}, b{0.25, 3e-5, 1, {}}, c{0.125, 2e-6, 1, {}};
  const std::vector<EstimateReport> ab{a, b}, bc{b, c};
  const std::vector<EstimateReport> left{compose_disjoint_sum(ab), c}, right{a, compose_disjoint_sum(bc)};
  EXPECT_DOUBLE_EQ(compose_disjoint_sum(left).mean, compose_disjoint_sum(right).mean);
  EXPECT_DOUBLE_EQ(compose_disjoint_sum(left).variance, compose_disjoint_sum(right).variance);
}

TEST(Compose, Product) {
  const std::vector<EstimateReport> id{{0.4, 1e-3, 1, {}}, {1.0, 0.0, 1, {}}};
  EXPECT_DOUBLE_EQ(compose_product(id).mean, 0.4);
  EXPECT_NEAR(compose_product(id).variance, 1e-3, 1e-15);
  const std::vector<EstimateReport> halves{{0.5, 0, 1, {}}, {0.5, 0, 1, {}}};
  EXPECT_DOUBLE_EQ(compose_product(halves).mean, 0.25);
  EXPECT_DOUBLE_EQ(compose_product(halves).variance, 0.0);
}

TEST(Compose, ProductVarianceMatchesSimulation) {
  const double m1 = 0.3, s1 = 0.05, m2 = 0.6, s2 = 0.1;
  const std::vector<EstimateReport> rs{{m1, s1 * s1, 1, {}}, {m2, s2 * s2, 1, {}}};
  RngStream rng(7, 0);
  RunningStats prod;
  for (int i = 0; i < 400000; ++i) prod.add((m1 + s1 * rng.normal()) * (m2 + s2 * rng.normal()));
  EXPECT_NEAR(compose_product(rs).variance / prod.sample_variance(), 1.0, 0.05);
}

TEST(Rae, Examples) {
  EXPECT_EQ(rae(0.5, 0.5), 0.0);
  EXPECT_NEAR(rae(0.55, 0.5), 0.1, 1e-12);
  EXPECT_EQ(rae(0.0, 0.5), 1.0);
  EXPECT_THROW(rae(0.1, 0.0), ConfigError);
}

TEST(RunningStats, MergeMatchesSequential) {
  RngStream rng(8, 0);
  RunningStats all, a, b;
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.normal();
    all.add(x);
    (i < 300 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR(a.mean(), all.mean(), 1e-12);
  EXPECT_NEAR(a.sample_variance(), all.sample_variance(), 1e-12);
}

TEST(Rng, StreamsAreReproducibleAndDistinct) {
  RngStream a(1, 2), b(1, 2), c(1, 3);
  const auto x = a(), y = b(), z = c();
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
  const RngStream root(5, 0);
  auto d1 = root.derive({1, 2}), d2 = root.derive({1, 2}), d3 = root.derive({2, 1});
  EXPECT_EQ(d1(), d2());
  EXPECT_NE(root.derive({1, 2}).stream_id(), d3.stream_id());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
