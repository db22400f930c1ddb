#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "paisc/constraint.hpp"
#include "paisc/distribution.hpp"
#include "paisc/paving.hpp"
#include "paisc/rng.hpp"

namespace paisc {

struct TracePoint {
  std::size_t samples_used = 0;
  double running_mean = 0.0;
};

struct EstimateReport {
  double mean = 0.0;
  double variance = 0.0;  // variance of the estimator, not of the samples
  std::size_t n_samples = 0;
  std::vector<TracePoint> trace;
};

// Hit-or-miss Monte Carlo: fraction of draws from p satisfying c, with
// variance p(1-p)/N.  Draws are taken in fixed-size batches on independent
// substreams.
EstimateReport dmc_estimate(const Constraint& c, const Distribution& p, std::size_t budget,
                            const RngStream& rng, unsigned threads = 1);

// Probability mass of a box under an independent product (product of
// per-variable interval masses).  Throws NotApplicableError for correlated
// inputs.
double box_mass(const Distribution& p, const Box& box);

// Stratified estimate over a paving: inner boxes contribute their mass,
// outer boxes are sampled from the truncated input distribution with budget
// proportional to their mass (at least kMinBoxSamples each).
EstimateReport stratified_estimate(const Constraint& c, const Distribution& p, const Paving& paving,
                                   std::size_t budget, const RngStream& rng, unsigned threads = 1);
inline constexpr std::size_t kMinBoxSamples = 10;

// Importance sampling with a fixed proposal: mean of p(x) 1_C(x) / q(x) over
// draws x ~ q, variance = sample variance of the weights / N.
EstimateReport importance_estimate(const Constraint& c, const Distribution& p,
                                   const Distribution& proposal, std::size_t budget,
                                   const RngStream& rng);

// Sum over disjoint path conditions, assuming independent runs.
EstimateReport compose_disjoint_sum(std::span<const EstimateReport> reports);
// Product over independent constraint slices.
EstimateReport compose_product(std::span<const EstimateReport> reports);

// |estimate - truth| / truth; truth must be nonzero.
double rae(double estimate, double truth);

// Streaming mean and variance (Welford).
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 for fewer than two values.
  double sample_variance() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace paisc
