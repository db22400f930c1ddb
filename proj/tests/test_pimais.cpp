#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <map>

#include "paisc/bench.hpp"
#include "paisc/pimais.hpp"

using namespace paisc;

namespace paisc {
void PrintTo(Kernel k, std::ostream* os) { *os << to_string(k); }
}  // namespace paisc

namespace {

std::span<const double> view(const Eigen::VectorXd& x) { return {x.data(), static_cast<std::size_t>(x.size())}; }

ChainState start(const Target& t, Eigen::VectorXd x, double scale = 1.0) {
  ChainState s;
  s.position = std::move(x);
  s.log_target = t.log_density(view(s.position));
  s.scale = scale;
  return s;
}

Eigen::MatrixXd sample_cov(const std::vector<Eigen::VectorXd>& xs, const Eigen::VectorXd& mean) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(mean.size(), mean.size());
  for (const auto& x : xs) c += (x - mean) * (x - mean).transpose();
  return c / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST(AdaptScale, RuleTable) {
  EXPECT_EQ(adapt_scale(1.0, 0.3), 1.0);
  EXPECT_EQ(adapt_scale(1.0, 0.01), 0.5);
  EXPECT_EQ(adapt_scale(1.0, 0.99), 2.0);
  EXPECT_DOUBLE_EQ(adapt_scale(1.0, 0.1), 0.9);
  EXPECT_DOUBLE_EQ(adapt_scale(1.0, 0.7), 1.1);
  EXPECT_EQ(adapt_scale(1.0, 0.2), 1.0);
  EXPECT_EQ(adapt_scale(1.0, 0.5), 1.0);
}

TEST(Mixture, MatchesNaiveSum) {
  RngStream rng(1, 0);
  const int n = 7, d = 3;
  Eigen::MatrixXd means(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) means(i, j) = 3 * rng.normal();
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(d, d);
  const MixtureProposal q(means, cov);
  const Eigen::MatrixXd inv = cov.inverse();
  const double norm = std::pow(2 * M_PI, -d / 2.0) / std::sqrt(cov.determinant());
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x[j] = 4 * rng.normal();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd r = x - means.row(i).transpose();
      sum += norm * std::exp(-0.5 * r.dot(inv * r));
    }
    EXPECT_NEAR(q.log_density(view(x)), std::log(sum / n), 1e-12);
  }
}

TEST(Mixture, SingleComponentAndPeak) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  Eigen::MatrixXd mean(1, 2);
  mean << 1, -1;
  const MixtureProposal q(mean, cov);
  const Distribution g(MultivariateGaussian{Eigen::Vector2d(1, -1), cov});
  const std::vector<double> x{0.4, 0.2};
  EXPECT_NEAR(q.log_density(x), g.log_pdf(x), 1e-12);

  Eigen::MatrixXd same(4, 2);
  same << 1, -1, 1, -1, 1, -1, 1, -1;
  const MixtureProposal q4(same, cov);
  const std::vector<double> at{1, -1};
  EXPECT_NEAR(q4.log_density(at), g.log_pdf(at), 1e-12);
}

TEST(Mixture, ComponentSamplesHaveTheSharedCovariance) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  Eigen::MatrixXd means(2, 2);
  means << 0, 0, 5, 5;
  const MixtureProposal q(means, cov);
  RngStream rng(2, 0);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 50000; ++i) xs.push_back(q.sample_component(1, rng));
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2);
  for (const auto& x : xs) m += x;
  m /= xs.size();
  EXPECT_NEAR(m[0], 5, 0.01);
  EXPECT_LT((sample_cov(xs, m) - cov).cwiseAbs().maxCoeff(), 0.01);
}

TEST(Rwmh, FlatTargetAlwaysAccepts) {
  const Constraint c = parse_constraint("x <= x", "x -100 100");
  const Distribution p(IndependentProduct{{Uniform{-100, 100}}});
  const Target t(c, p);
  RngStream rng(3, 0);
  ChainState s = start(t, Eigen::VectorXd::Zero(1));
  for (int i = 0; i < 200; ++i) {
    auto tr = rwmh_step(s, t, nullptr, rng);
    ASSERT_TRUE(tr.accepted);
    s = tr.state;
  }
}

TEST(Rwmh, InfeasibleProposalsRejected) {
  const Constraint c = parse_constraint("x == 0.5", "x -1 1");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  const Target t(c, p);
  RngStream rng(4, 0);
  const ChainState s = start(t, Eigen::VectorXd::Constant(1, 0.5));
  for (int i = 0; i < 200; ++i) {
    const auto tr = rwmh_step(s, t, nullptr, rng);
    ASSERT_FALSE(tr.accepted);
    ASSERT_EQ(tr.state.position[0], 0.5);
  }
}

TEST(Rwmh, OneDimensionalGaussianMoments) {
  const Constraint c = parse_constraint("x <= x", "x -100 100");
  const Distribution p(IndependentProduct{{Gaussian{3, 2}}});
  const Target t(c, p);
  RngStream rng(5, 0);
  ChainState s = start(t, Eigen::VectorXd::Constant(1, 3.0), 2.5);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    s = rwmh_step(s, t, nullptr, rng).state;
    st.add(s.position[0]);
  }
  EXPECT_NEAR(st.mean(), 3.0, 0.05 * 3.0);
  EXPECT_NEAR(st.sample_variance(), 4.0, 0.05 * 4.0);
}

TEST(Rwmh, TruncatedKernelOnTruncatedTarget) {
  // x ~ N(0,1) restricted to [1, 2]; the kernel box is the constraint's box.
  const Constraint c = parse_constraint("x >= 1 && x <= 2", "x -10 10");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  const Target t(c, p);
  const Box kb = *bounding_box(c);
  RngStream rng(6, 0);
  ChainState s = start(t, Eigen::VectorXd::Constant(1, 1.5), 1.0);
  RunningStats st;
  for (int i = 0; i < 200000; ++i) {
    s = rwmh_step(s, t, &kb, rng).state;
    ASSERT_TRUE(c.satisfied(view(s.position)));
    st.add(s.position[0]);
  }
  auto phi = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); };
  const double mass = 0.5 * (std::erfc(1 / std::sqrt(2.0)) - std::erfc(2 / std::sqrt(2.0)));
  EXPECT_NEAR(st.mean(), (phi(1) - phi(2)) / mass, 0.01);
}

class GaussianChains : public ::testing::TestWithParam<Kernel> {};

TEST_P(GaussianChains, TwoDimensionalMomentsAt1e5Steps) {
  Eigen::MatrixXd cov(2, 2);
  cov << 0.2, 0.1, 0.1, 0.2;
  const Eigen::Vector2d mean(1, -1);
  const Constraint c = parse_constraint("x <= x && y <= y", "x -100 100\ny -100 100");
  const Distribution p(MultivariateGaussian{mean, cov});
  const Target t(c, p);
  RngStream rng(7, 0);
  ChainState s = start(t, mean, 0.5);
  std::vector<Eigen::VectorXd> xs;
  for (int i = 0; i < 100000; ++i) {
    s = GetParam() == Kernel::Hmc ? hmc_step(s, t, 20, 0.1, rng).state : rwmh_step(s, t, nullptr, rng).state;
    xs.push_back(s.position);
  }
  Eigen::VectorXd m = Eigen::VectorXd::Zero(2);
  for (const auto& x : xs) m += x;
  m /= xs.size();
  EXPECT_LT((m - mean).cwiseAbs().maxCoeff(), 0.05);
  const Eigen::MatrixXd sc = sample_cov(xs, m);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(sc(i, j), cov(i, j), 0.1 * cov(i, j));
}

INSTANTIATE_TEST_SUITE_P(Kernels, GaussianChains, ::testing::Values(Kernel::Rwmh, Kernel::Hmc),
                         [](const auto& info) { return info.param == Kernel::Hmc ? std::string("hmc") : std::string("rwmh"); });

TEST(Hmc, TinyStepReturnsStartAndAccepts) {
  const Subject s = gen_sphere(3);
  const Target t(s.constraint, s.distribution);
  RngStream rng(8, 0);
  const ChainState st = start(t, Eigen::VectorXd::Constant(3, 1.0));
  for (int i = 0; i < 50; ++i) {
    const auto tr = hmc_step(st, t, 20, 1e-12, rng);
    EXPECT_TRUE(tr.accepted);
    EXPECT_LT((tr.state.position - st.position).norm(), 1e-9);
  }
}

TEST(Hmc, LeavingTheConstraintRejects) {
  const Constraint c = parse_constraint("x >= -0.01 && x <= 0.01", "x -1 1");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  const Target t(c, p);
  RngStream rng(9, 0);
  const ChainState s = start(t, Eigen::VectorXd::Zero(1));
  int accepted = 0;
  for (int i = 0; i < 100; ++i) {
    const auto tr = hmc_step(s, t, 20, 0.1, rng);
    accepted += tr.accepted;
    ASSERT_TRUE(c.satisfied(view(tr.state.position)));
  }
  EXPECT_LT(accepted, 5);
}

TEST(Leapfrog, ReversibleAndNearlyConservative) {
  const Subject s = gen_sphere(4);
  const Target t(s.constraint, s.distribution);
  const Constraint open = parse_constraint("x1 <= x1", "x1 -10 10\nx2 -10 10\nx3 -10 10\nx4 -10 10");
  const Target free(open, s.distribution);
  RngStream rng(10, 0);
  for (int i = 0; i < 20; ++i) {
    PhasePoint z{Eigen::VectorXd(4), Eigen::VectorXd(4), true};
    for (int k = 0; k < 4; ++k) {
      z.position[k] = 1 + 0.4 * (rng.uniform() - 0.5);
      z.momentum[k] = rng.normal();
    }
    PhasePoint end = leapfrog(free, z, 20, 0.1);
    ASSERT_TRUE(end.valid);
    EXPECT_LT(std::abs(hamiltonian(free, end) - hamiltonian(free, z)), 0.2);
    end.momentum = -end.momentum;
    const PhasePoint back = leapfrog(free, end, 20, 0.1);
    EXPECT_LT((back.position - z.position).norm(), 1e-6);
  }
}

TEST(Seeding, SingleFeasiblePointFillsAllChains) {
  const Constraint c = parse_constraint("x == 0.5 && y == -0.25", "x -1 1\ny -1 1");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}, Gaussian{0, 1}}});
  for (auto strategy : {SeedStrategy::Single, SeedStrategy::Diverse, SeedStrategy::DiverseResample}) {
    PimaisConfig cfg;
    cfg.seed_strategy = strategy;
    const SeedResult r = seed_chains(c, p, cfg, RngStream(1, 0));
    EXPECT_EQ(r.distinct, 1u);
    ASSERT_EQ(r.positions.size(), cfg.n_chains);
    for (const auto& x : r.positions) EXPECT_EQ(x, Eigen::Vector2d(0.5, -0.25));
  }
}

TEST(Seeding, EqualDensitiesResampleUniformly) {
  const Distribution p(IndependentProduct{{Uniform{-1, 1}}});
  std::vector<Eigen::VectorXd> cands;
  for (double v : {-0.75, -0.25, 0.25, 0.75}) cands.push_back(Eigen::VectorXd::Constant(1, v));
  RngStream rng(2, 0);
  const auto drawn = resample_by_density(cands, p, 40000, rng);
  std::map<double, int> counts;
  for (const auto& x : drawn) ++counts[x[0]];
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [v, n] : counts) EXPECT_NEAR(n, 10000, 4 * std::sqrt(10000 * 0.75)) << v;
}

TEST(Seeding, ResampleFollowsDensity) {
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  const std::vector<Eigen::VectorXd> cands{Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 2.0)};
  RngStream rng(3, 0);
  const auto drawn = resample_by_density(cands, p, 50000, rng);
  int at_zero = 0;
  for (const auto& x : drawn) at_zero += x[0] == 0.0;
  const double w0 = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(at_zero / 50000.0, w0, 0.01);
}

TEST(Seeding, CorrelatedTorusCoversBothLobes) {
  const Subject s = gen_torus(true);
  PimaisConfig cfg;
  cfg.seed_strategy = SeedStrategy::Diverse;
  const SeedResult r = seed_chains(s.constraint, s.distribution, cfg, RngStream(4, 0));
  bool neg = false, pos = false;
  for (const auto& x : r.positions) {
    neg = neg || x[0] < 0;
    pos = pos || x[0] > 0;
    EXPECT_TRUE(s.constraint.satisfied(view(x)));
  }
  EXPECT_TRUE(neg && pos);
}

TEST(Seeding, InfeasibleFails) {
  const Constraint c = parse_constraint("x^2 + y^2 <= -1", "x -1 1\ny -1 1");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}, Gaussian{0, 1}}});
  EXPECT_THROW(seed_chains(c, p, PimaisConfig{}, RngStream(5, 0)), SeedingError);
}

TEST(Seeding, ThinHighDimensionalRegion) {
  const Subject s = gen_sphere(10);
  const SeedResult r = seed_chains(s.constraint, s.distribution, PimaisConfig{}, RngStream(6, 0));
  EXPECT_GT(r.distinct, 0u);
  EXPECT_EQ(r.samples_used, 0u);
}

TEST(Config, Invariants) {
  PimaisConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.n_chains = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PimaisConfig{};
  cfg.hmc_step_size = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = PimaisConfig{};
  cfg.budget = cfg.n_chains * cfg.warmup;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_EQ(parse_kernel("rwmh-truncated"), Kernel::RwmhTruncated);
  EXPECT_EQ(parse_seed_strategy("diverse+resample"), SeedStrategy::DiverseResample);
  EXPECT_THROW(parse_kernel("nuts"), ConfigError);
}

TEST(Pimais, BudgetAccounting) {
  const Subject s = gen_sphere(2);
  PimaisConfig cfg;
  cfg.budget = 100'000;
  PimaisDiagnostics d;
  const auto r = pimais_run(s.constraint, s.distribution, cfg, RngStream(1, 0), &d);
  EXPECT_EQ(d.iterations, (100'000u - 100 * 500) / 500);
  EXPECT_LE(r.n_samples, cfg.budget);
  EXPECT_EQ(r.n_samples, 100u * 500 + d.iterations * 500);
  EXPECT_EQ(r.trace.size(), d.iterations);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GT(r.trace[i].samples_used, r.trace[i - 1].samples_used);
  EXPECT_GE(r.variance, 0.0);
}

TEST(Pimais, DeterministicAcrossThreadCounts) {
  const Subject s = gen_torus(true);
  PimaisConfig cfg;
  cfg.budget = 60'000;
  cfg.threads = 1;
  const auto a = pimais_run(s.constraint, s.distribution, cfg, RngStream(2, 0));
  cfg.threads = 4;
  const auto b = pimais_run(s.constraint, s.distribution, cfg, RngStream(2, 0));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  cfg.kernel = Kernel::Hmc;
  const auto c = pimais_run(s.constraint, s.distribution, cfg, RngStream(2, 0));
  cfg.threads = 1;
  const auto d = pimais_run(s.constraint, s.distribution, cfg, RngStream(2, 0));
  EXPECT_EQ(c.mean, d.mean);
}

TEST(Pimais, CircleAgreesWithDmc) {
  const Constraint c = parse_constraint("x*x + y*y <= 1", "x -2 2\ny -2 2");
  const Distribution p(IndependentProduct{{Uniform{-2, 2}, Uniform{-2, 2}}});
  PimaisConfig cfg;
  cfg.budget = 100'000;
  const auto a = pimais_run(c, p, cfg, RngStream(3, 0));
  const auto b = dmc_estimate(c, p, 100'000, RngStream(4, 0));
  EXPECT_NEAR(a.mean, b.mean, 3 * std::sqrt(a.variance + b.variance));
}

TEST(Pimais, TautologyWithExactCovarianceIsUnbiased) {
  const Constraint c = parse_constraint("x <= x", "x -50 50");
  const Distribution p(IndependentProduct{{Gaussian{0, 1}}});
  PimaisConfig cfg;
  cfg.budget = 100'000;
  const auto r = pimais_run(c, p, cfg, RngStream(5, 0));
  EXPECT_NEAR(r.mean, 1.0, 4 * std::sqrt(r.variance));
}

TEST(Pimais, SphereTwoBeatsDmc) {
  const Subject s = gen_sphere(2);
  const double truth = sphere_truth(2);
  std::vector<double> ours, dmc;
  for (int rep = 0; rep < 10; ++rep) {
    PimaisConfig cfg;
    cfg.budget = 100'000;
    ours.push_back(rae(pimais_run(s.constraint, s.distribution, cfg, RngStream(100 + rep, 0)).mean, truth));
    dmc.push_back(rae(dmc_estimate(s.constraint, s.distribution, 100'000, RngStream(200 + rep, 0)).mean, truth));
  }
  EXPECT_LT(median(ours), median(dmc));
}

TEST(Pimais, CorrelatedTorusNearCachedTruth) {
  Subject s = gen_torus(true);
  attach_truth(s, load_truths(fixture_dir()));
  ASSERT_TRUE(s.truth);
  std::vector<double> raes;
  for (int rep = 0; rep < 10; ++rep) {
    PimaisConfig cfg;
    cfg.budget = 100'000;
    raes.push_back(rae(pimais_run(s.constraint, s.distribution, cfg, RngStream(300 + rep, 0)).mean, s.truth->value));
  }
  EXPECT_LT(median(raes), 0.1);
}

TEST(Importance, OptimalProposalHasZeroVariance) {
  const Constraint c = parse_constraint("x >= 0 && x <= 1 && y >= -1 && y <= 0.5", "x -2 2\ny -2 2");
  const Distribution p(IndependentProduct{{Uniform{-2, 2}, Uniform{-2, 2}}});
  const Distribution q(IndependentProduct{{Uniform{0, 1}, Uniform{-1, 0.5}}});
  const auto r = importance_estimate(c, p, q, 10000, RngStream(6, 0));
  const double truth = 1.5 / 16;
  EXPECT_NEAR(r.mean, truth, 1e-12 * truth);
  EXPECT_LT(r.variance, 1e-20);
}
