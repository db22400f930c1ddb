#include "paisc/pimais.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <numbers>

#include "paisc/error.hpp"
#include "paisc/parallel.hpp"
#include "paisc/paving.hpp"

namespace paisc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// Stream tags keep the derived substreams of different phases apart.
enum Phase : std::uint64_t { kCovariance = 1, kSeeding = 2, kWarmup = 3, kIterate = 4 };

}  // namespace

std::string to_string(Kernel k) {
  switch (k) {
    case Kernel::Rwmh: return "rwmh";
    case Kernel::RwmhTruncated: return "rwmh-truncated";
    case Kernel::Hmc: return "hmc";
  }
  return "?";
}

std::string to_string(SeedStrategy s) {
  switch (s) {
    case SeedStrategy::Single: return "single";
    case SeedStrategy::Diverse: return "diverse";
    case SeedStrategy::DiverseResample: return "diverse+resample";
  }
  return "?";
}

Kernel parse_kernel(const std::string& s) {
  if (s == "rwmh") return Kernel::Rwmh;
  if (s == "rwmh-truncated") return Kernel::RwmhTruncated;
  if (s == "hmc") return Kernel::Hmc;
  throw ConfigError("unknown kernel '" + s + "' (expected rwmh, rwmh-truncated or hmc)");
}

SeedStrategy parse_seed_strategy(const std::string& s) {
  if (s == "single") return SeedStrategy::Single;
  if (s == "diverse") return SeedStrategy::Diverse;
  if (s == "diverse+resample") return SeedStrategy::DiverseResample;
  throw ConfigError("unknown seed strategy '" + s + "' (expected single, diverse or diverse+resample)");
}

void PimaisConfig::validate() const {
  if (n_chains < 1 || samples_per_proposal < 1) throw ConfigError("n_chains and M must be >= 1");
  if (!(rwmh_scale > 0.0)) throw ConfigError("rwmh_scale must be > 0");
  if (!(hmc_step_size > 0.0)) throw ConfigError("hmc_step_size must be > 0");
  if (!(proposal_cov_factor > 0.0)) throw ConfigError("proposal_cov_factor must be > 0");
  if (hmc_steps < 1) throw ConfigError("hmc_steps must be >= 1");
  if (!(seed_accuracy > 0.0)) throw ConfigError("seed_accuracy must be > 0");
  if (adapt_window < 1) throw ConfigError("adapt_window must be >= 1");
  if (budget < n_chains * warmup + n_chains * samples_per_proposal)
    throw ConfigError("budget " + std::to_string(budget) + " does not cover warmup (" +
                      std::to_string(n_chains * warmup) + ") plus one iteration (" +
                      std::to_string(n_chains * samples_per_proposal) + ")");
}

Target::Target(const Constraint& c, const Distribution& p) : c_(c), p_(p) {
  if (c.dim() != p.dim()) throw ConfigError("distribution and constraint dimensions differ");
}

double Target::log_density(std::span<const double> x) const {
  if (!c_.satisfied(x)) return kNegInf;
  return p_.log_pdf(x);
}

Eigen::VectorXd Target::grad_log_density(std::span<const double> x) const {
  return p_.grad_log_pdf(x);
}

Transition rwmh_step(const ChainState& s, const Target& target, const Box* kernel_box,
                     RngStream& rng) {
  const auto d = s.position.size();
  Eigen::VectorXd proposal(d);
  double log_hastings = 0.0;
  if (kernel_box == nullptr) {
    for (Eigen::Index i = 0; i < d; ++i) proposal[i] = s.position[i] + s.scale * rng.normal();
  } else {
    for (Eigen::Index i = 0; i < d; ++i) {
      const Interval side = (*kernel_box)[static_cast<std::size_t>(i)];
      if (!(side.lo() < side.hi())) {
        proposal[i] = s.position[i];
        continue;
      }
      const Gaussian k{s.position[i], s.scale};
      proposal[i] = sample_truncated(k, side.lo(), side.hi(), rng);
      // kappa(x | x') / kappa(x' | x) = Z(x) / Z(x') for the truncated kernel.
      const double z_from = interval_mass(k, side.lo(), side.hi());
      const double z_to = interval_mass(Gaussian{proposal[i], s.scale}, side.lo(), side.hi());
      log_hastings += std::log(z_from) - std::log(z_to);
    }
  }
  const double log_target = target.log_density(view(proposal));
  const double log_alpha = log_target - s.log_target + log_hastings;
  const double u = rng.uniform();
  if (log_target > kNegInf && (log_alpha >= 0.0 || std::log(u) < log_alpha))
    return {{std::move(proposal), log_target, s.scale}, true};
  return {s, false};
}

double hamiltonian(const Target& target, const PhasePoint& z) {
  const double u = -target.log_density(view(z.position));
  return u + 0.5 * z.momentum.squaredNorm();
}

PhasePoint leapfrog(const Target& target, PhasePoint z, std::size_t steps, double step_size) {
  auto grad_u = [&](const Eigen::VectorXd& x) -> std::optional<Eigen::VectorXd> {
    if (!target.constraint().satisfied(view(x))) return std::nullopt;
    try {
      return -target.grad_log_density(view(x));
    } catch (const SupportError&) {
      return std::nullopt;
    }
  };
  auto g = grad_u(z.position);
  if (!g) {
    z.valid = false;
    return z;
  }
  for (std::size_t t = 0; t < steps; ++t) {
    z.momentum -= 0.5 * step_size * *g;
    z.position += step_size * z.momentum;
    g = grad_u(z.position);
    if (!g) {
      z.valid = false;
      return z;
    }
    z.momentum -= 0.5 * step_size * *g;
  }
  return z;
}

Transition hmc_step(const ChainState& s, const Target& target, std::size_t steps, double step_size,
                    RngStream& rng) {
  PhasePoint start{s.position, Eigen::VectorXd(s.position.size()), true};
  for (auto& r : start.momentum) r = rng.normal();
  const double h0 = -s.log_target + 0.5 * start.momentum.squaredNorm();
  const PhasePoint end = leapfrog(target, start, steps, step_size);
  const double u = rng.uniform();
  if (!end.valid) return {s, false};
  const double log_target = target.log_density(view(end.position));
  if (log_target == kNegInf) return {s, false};
  const double h1 = -log_target + 0.5 * end.momentum.squaredNorm();
  if (std::isfinite(h1) && std::log(u) < h0 - h1)
    return {{end.position, log_target, s.scale}, true};
  return {s, false};
}

double adapt_scale(double scale, double acc) {
  if (acc < 0.05) return scale * 0.5;
  if (acc < 0.2) return scale * 0.9;
  if (acc > 0.95) return scale * 2.0;
  if (acc > 0.5) return scale * 1.1;
  return scale;
}

MixtureProposal::MixtureProposal(Eigen::MatrixXd means, const Eigen::MatrixXd& cov)
    : means_(std::move(means)) {
  if (means_.rows() < 1) throw ConfigError("mixture needs at least one component");
  if (cov.rows() != means_.cols() || cov.cols() != means_.cols())
    throw ConfigError("mixture covariance shape mismatch");
  chol_.compute(cov);
  if (chol_.info() != Eigen::Success) throw ConfigError("mixture covariance is not positive definite");
  chol_l_ = chol_.matrixL();
  whitened_means_ =
      chol_l_.triangularView<Eigen::Lower>().solve(means_.transpose()).transpose();
  log_norm_ = -static_cast<double>(dim()) * kLogSqrt2Pi - chol_l_.diagonal().array().log().sum();
}

double MixtureProposal::component_log_density(std::size_t n, std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd y = chol_l_.triangularView<Eigen::Lower>().solve(xv);
  return log_norm_ - 0.5 * (y.transpose() - whitened_means_.row(static_cast<Eigen::Index>(n))).squaredNorm();
}

double MixtureProposal::log_density(std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::RowVectorXd y =
      chol_l_.triangularView<Eigen::Lower>().solve(xv).transpose();
  const Eigen::VectorXd sq = (whitened_means_.rowwise() - y).rowwise().squaredNorm();
  const double m = sq.minCoeff();
  const double s = (-0.5 * (sq.array() - m)).exp().sum();
  return log_norm_ - 0.5 * m + std::log(s) - std::log(static_cast<double>(size()));
}

Eigen::VectorXd MixtureProposal::sample_component(std::size_t n, RngStream& rng) const {
  Eigen::VectorXd z(static_cast<Eigen::Index>(dim()));
  for (auto& v : z) v = rng.normal();
  return means_.row(static_cast<Eigen::Index>(n)).transpose() + chol_l_ * z;
}

std::vector<Eigen::VectorXd> resample_by_density(const std::vector<Eigen::VectorXd>& candidates,
                                                 const Distribution& p, std::size_t n,
                                                 RngStream& rng) {
  std::vector<double> logw(candidates.size());
  double max_logw = kNegInf;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    logw[i] = p.log_pdf(view(candidates[i]));
    max_logw = std::max(max_logw, logw[i]);
  }
  std::vector<double> cumulative(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    // All-zero densities degrade to a uniform choice.
    total += max_logw == kNegInf ? 1.0 : std::exp(logw[i] - max_logw);
    cumulative[i] = total;
  }
  std::vector<Eigen::VectorXd> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform() * total;
    auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    out.push_back(candidates[static_cast<std::size_t>(it - cumulative.begin())]);
  }
  return out;
}

SeedResult seed_chains(const Constraint& c, const Distribution& p, const PimaisConfig& cfg,
                       const RngStream& rng) {
  SeedResult result;
  const std::size_t wanted = cfg.seed_strategy == SeedStrategy::Single ? 1 : cfg.seed_max_boxes;
  std::vector<Eigen::VectorXd> feasible;
  // Coarse leaves of a thin region can all have infeasible centers, so the
  // search is repeated at finer accuracy before falling back to sampling.
  double accuracy = cfg.seed_accuracy;
  for (int attempt = 0; attempt < kSeedRefinements && feasible.empty(); ++attempt, accuracy *= 0.1) {
    for (const Box& b : dfs_feasible_boxes(c, accuracy, wanted)) {
      const auto center = b.center();
      if (!c.satisfied(center)) continue;  // inner boxes are certified, but stay strict
      feasible.emplace_back(Eigen::Map<const Eigen::VectorXd>(center.data(),
                                                              static_cast<Eigen::Index>(center.size())));
    }
  }

  RngStream stream = rng.derive({kSeeding});
  if (feasible.empty()) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(c.dim()));
    for (std::size_t i = 0; i < kSeedFallbackDraws; ++i) {
      p.sample(stream, std::span<double>(x.data(), c.dim()));
      ++result.samples_used;
      if (c.satisfied(view(x))) {
        feasible.push_back(x);
        break;
      }
    }
  }
  if (feasible.empty())
    throw SeedingError("seeding failed: no feasible point found (constraint possibly infeasible)");
  result.distinct = feasible.size();

  switch (cfg.seed_strategy) {
    case SeedStrategy::Single:
      result.positions.assign(cfg.n_chains, feasible.front());
      break;
    case SeedStrategy::Diverse:
      // Evenly spaced over the search order, which walks the domain left to right.
      for (std::size_t n = 0; n < cfg.n_chains; ++n)
        result.positions.push_back(feasible[n * feasible.size() / cfg.n_chains % feasible.size()]);
      break;
    case SeedStrategy::DiverseResample:
      result.positions = resample_by_density(feasible, p, cfg.n_chains, stream);
      break;
  }
  return result;
}

EstimateReport pimais_run(const Constraint& c, const Distribution& p, const PimaisConfig& cfg,
                          const RngStream& rng, PimaisDiagnostics* diagnostics) {
  cfg.validate();
  const Target target(c, p);
  const std::size_t n_chains = cfg.n_chains;
  const std::size_t m = cfg.samples_per_proposal;
  const auto d = static_cast<Eigen::Index>(c.dim());

  RngStream cov_stream = rng.derive({kCovariance});
  const CovarianceEstimate lambda = p.covariance(cov_stream);
  Eigen::MatrixXd proposal_cov = cfg.proposal_cov_factor * lambda.cov;
  // A sample covariance can come out singular; keep the proposal proper.
  const double jitter = 1e-10 * std::max(1.0, proposal_cov.trace() / static_cast<double>(d));
  if (Eigen::LLT<Eigen::MatrixXd>(proposal_cov).info() != Eigen::Success)
    proposal_cov += jitter * Eigen::MatrixXd::Identity(d, d);

  std::optional<Box> kernel_box;
  if (cfg.kernel == Kernel::RwmhTruncated) {
    kernel_box = bounding_box(c);
    if (!kernel_box) throw SeedingError("seeding failed: constraint is infeasible on its domain");
  }
  const Box* kbox = kernel_box ? &*kernel_box : nullptr;

  SeedResult seeds = seed_chains(c, p, cfg, rng);
  std::size_t used = lambda.samples_used + seeds.samples_used + n_chains * cfg.warmup;
  if (used + n_chains * m > cfg.budget)
    throw ConfigError("budget too small for covariance estimation, seeding and warmup");
  const std::size_t iterations = cfg.iterations > 0 ? cfg.iterations : (cfg.budget - used) / (n_chains * m);

  std::vector<ChainState> chains(n_chains);
  for (std::size_t n = 0; n < n_chains; ++n) {
    chains[n].position = seeds.positions[n];
    chains[n].log_target = target.log_density(view(chains[n].position));
    chains[n].scale = cfg.rwmh_scale;
    assert(std::isfinite(chains[n].log_target));
  }

  auto step = [&](const ChainState& s, RngStream& stream) -> Transition {
    if (cfg.kernel == Kernel::Hmc) return hmc_step(s, target, cfg.hmc_steps, cfg.hmc_step_size, stream);
    return rwmh_step(s, target, cfg.kernel == Kernel::RwmhTruncated ? kbox : nullptr, stream);
  };

  // Warmup: chains are independent until the mixture is formed, so each one
  // runs its whole warmup on its own substream.
  std::vector<std::size_t> warm_accepts(n_chains, 0);
  parallel_for(n_chains, cfg.threads, [&](std::size_t n) {
    RngStream stream = rng.derive({kWarmup, n});
    std::size_t window_accepts = 0;
    for (std::size_t w = 0; w < cfg.warmup; ++w) {
      Transition t = step(chains[n], stream);
      chains[n] = std::move(t.state);
      window_accepts += t.accepted;
      warm_accepts[n] += t.accepted;
      if (cfg.kernel != Kernel::Hmc && (w + 1) % cfg.adapt_window == 0) {
        chains[n].scale = adapt_scale(
            chains[n].scale, static_cast<double>(window_accepts) / static_cast<double>(cfg.adapt_window));
        window_accepts = 0;
      }
    }
  });

  EstimateReport report;
  RunningStats all;
  std::size_t accepts = 0;
  Eigen::MatrixXd means(static_cast<Eigen::Index>(n_chains), d);
  std::vector<RngStream> streams;
  streams.reserve(n_chains);
  for (std::size_t n = 0; n < n_chains; ++n) streams.push_back(rng.derive({kIterate, n, 0}));
  std::vector<RunningStats> per_chain(n_chains);
  std::vector<std::size_t> accepted(n_chains);

  for (std::size_t t = 0; t < iterations; ++t) {
    parallel_for(n_chains, cfg.threads, [&](std::size_t n) {
      streams[n] = rng.derive({kIterate, n, t});
      Transition tr = step(chains[n], streams[n]);
      accepted[n] = tr.accepted;
      chains[n] = std::move(tr.state);
      assert(c.satisfied(view(chains[n].position)));
    });
    for (std::size_t n = 0; n < n_chains; ++n) {
      means.row(static_cast<Eigen::Index>(n)) = chains[n].position.transpose();
      accepts += accepted[n];
    }
    // Barrier: every weight below mixes all N sub-proposals of iteration t.
    const MixtureProposal q(means, proposal_cov);
    parallel_for(n_chains, cfg.threads, [&](std::size_t n) {
      RunningStats stats;
      for (std::size_t k = 0; k < m; ++k) {
        const Eigen::VectorXd x = q.sample_component(n, streams[n]);
        const double log_p = target.log_density(view(x));
        const double w = log_p == kNegInf ? 0.0 : std::exp(log_p - q.log_density(view(x)));
        assert(std::isfinite(w) && w >= 0.0);
        stats.add(w);
      }
      per_chain[n] = stats;
    });
    for (const auto& s : per_chain) all.merge(s);
    used += n_chains * m;
    report.trace.push_back({used, all.mean()});
  }

  report.mean = all.mean();
  report.variance = all.count() > 0 ? all.sample_variance() / static_cast<double>(all.count()) : 0.0;
  report.n_samples = used;

  if (diagnostics) {
    diagnostics->iterations = iterations;
    diagnostics->seeds_found = seeds.distinct;
    std::size_t wa = 0;
    for (auto a : warm_accepts) wa += a;
    diagnostics->warmup_acceptance =
        cfg.warmup > 0 ? static_cast<double>(wa) / static_cast<double>(n_chains * cfg.warmup) : 0.0;
    diagnostics->acceptance =
        iterations > 0 ? static_cast<double>(accepts) / static_cast<double>(n_chains * iterations) : 0.0;
    diagnostics->final_scales.clear();
    for (const auto& ch : chains) diagnostics->final_scales.push_back(ch.scale);
  }
  return report;
}

}  // namespace paisc
