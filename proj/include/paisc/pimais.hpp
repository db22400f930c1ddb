#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "paisc/constraint.hpp"
#include "paisc/distribution.hpp"
#include "paisc/estimators.hpp"
#include "paisc/rng.hpp"

namespace paisc {

enum class Kernel { Rwmh, RwmhTruncated, Hmc };
enum class SeedStrategy { Single, Diverse, DiverseResample };

std::string to_string(Kernel k);
std::string to_string(SeedStrategy s);
Kernel parse_kernel(const std::string& s);
SeedStrategy parse_seed_strategy(const std::string& s);

struct PimaisConfig {
  std::size_t n_chains = 100;
  std::size_t samples_per_proposal = 5;
  // 0 means: as many iterations as the budget leaves after warmup.
  std::size_t iterations = 0;
  std::size_t warmup = 500;
  double rwmh_scale = 1.0;
  double proposal_cov_factor = 0.5;
  std::size_t hmc_steps = 20;
  double hmc_step_size = 0.1;
  Kernel kernel = Kernel::RwmhTruncated;
  SeedStrategy seed_strategy = SeedStrategy::DiverseResample;
  std::size_t budget = 1'000'000;
  // Depth-first interval search used for seeding.
  double seed_accuracy = 0.1;
  std::size_t seed_max_boxes = 1000;
  // Warmup steps between scale adaptations.
  std::size_t adapt_window = 50;
  unsigned threads = 1;

  // Throws ConfigError on violated invariants.
  void validate() const;
};

// Unnormalized constrained target p(x) 1_C(x).
class Target {
 public:
  Target(const Constraint& c, const Distribution& p);
  // -inf outside the constraint.
  double log_density(std::span<const double> x) const;
  // Gradient of log p only; the indicator contributes nothing inside C.
  Eigen::VectorXd grad_log_density(std::span<const double> x) const;
  std::size_t dim() const { return p_.dim(); }
  const Constraint& constraint() const { return c_; }
  const Distribution& distribution() const { return p_; }

 private:
  const Constraint& c_;
  const Distribution& p_;
};

struct ChainState {
  Eigen::VectorXd position;
  double log_target = 0.0;
  double scale = 1.0;  // RWMH proposal standard deviation
};

struct Transition {
  ChainState state;
  bool accepted = false;
};

// Random-walk Metropolis-Hastings step with N(x, scale^2 I) proposals, or,
// with a kernel box, per-dimension Gaussians truncated to the box together
// with the matching Hastings correction.
Transition rwmh_step(const ChainState& s, const Target& target, const Box* kernel_box,
                     RngStream& rng);

struct PhasePoint {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;
  // False once the trajectory left the constraint (infinite potential).
  bool valid = true;
};

// `steps` leapfrog steps of size `step_size` for H = |rho|^2/2 - log p(x).
PhasePoint leapfrog(const Target& target, PhasePoint start, std::size_t steps, double step_size);
double hamiltonian(const Target& target, const PhasePoint& z);

// Hamiltonian Monte Carlo step with unit mass matrix.  Trajectories that
// cross the constraint boundary are rejected.
Transition hmc_step(const ChainState& s, const Target& target, std::size_t steps, double step_size,
                    RngStream& rng);

// Multiplicative scale tuning toward acceptance in [0.2, 0.5].
double adapt_scale(double scale, double acceptance_rate);

// Equal-weight Gaussian mixture with a shared covariance.
class MixtureProposal {
 public:
  MixtureProposal(Eigen::MatrixXd means, const Eigen::MatrixXd& cov);

  std::size_t size() const { return static_cast<std::size_t>(means_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(means_.cols()); }
  const Eigen::MatrixXd& means() const { return means_; }

  // log((1/N) sum_n N(x; mu_n, cov)), computed with log-sum-exp.
  double log_density(std::span<const double> x) const;
  double component_log_density(std::size_t n, std::span<const double> x) const;
  Eigen::VectorXd sample_component(std::size_t n, RngStream& rng) const;

 private:
  Eigen::MatrixXd means_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::MatrixXd chol_l_;
  Eigen::MatrixXd whitened_means_;  // row n: L^{-1} mu_n
  double log_norm_ = 0.0;
};

struct SeedResult {
  std::vector<Eigen::VectorXd> positions;  // n_chains starting points
  std::size_t distinct = 0;                // feasible points found
  std::size_t samples_used = 0;            // rejection-sampling fallback draws
};

// Starting points for the chains, from depth-first interval search (box
// centers satisfying c, searched again at finer accuracy when none is
// found), replicated, cycled or resampled in proportion to p per
// `cfg.seed_strategy`.  Falls back to rejection sampling from p.
// Throws SeedingError when nothing feasible is found.
SeedResult seed_chains(const Constraint& c, const Distribution& p, const PimaisConfig& cfg,
                       const RngStream& rng);
inline constexpr std::size_t kSeedFallbackDraws = 100000;
// Depth-first searches tried (accuracy divided by 10 each time) before the
// sampling fallback.
inline constexpr int kSeedRefinements = 3;

// Categorical resampling of `n` points from `candidates` with weights
// proportional to p.
std::vector<Eigen::VectorXd> resample_by_density(const std::vector<Eigen::VectorXd>& candidates,
                                                 const Distribution& p, std::size_t n,
                                                 RngStream& rng);

struct PimaisDiagnostics {
  std::size_t iterations = 0;
  std::size_t seeds_found = 0;
  double warmup_acceptance = 0.0;
  double acceptance = 0.0;  // during the estimation iterations
  std::vector<double> final_scales;
};

// Adaptive importance sampling with N interacting chains: each iteration
// moves every chain one MCMC step, draws M points around every chain state
// and weights them against the whole mixture.  The estimate is the mean
// weight; its variance is the sample variance of the weights divided by the
// number of weighted draws.
EstimateReport pimais_run(const Constraint& c, const Distribution& p, const PimaisConfig& cfg,
                          const RngStream& rng, PimaisDiagnostics* diagnostics = nullptr);

}  // namespace paisc
