#include "paisc/estimators.hpp"

#include <cmath>
#include <numeric>

#include "paisc/error.hpp"
#include "paisc/parallel.hpp"

namespace paisc {

namespace {

constexpr std::size_t kBatch = 8192;
constexpr std::size_t kStratifiedRounds = 10;

}  // namespace

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double delta = o.mean_ - mean_;
  mean_ += delta * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double RunningStats::sample_variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

EstimateReport dmc_estimate(const Constraint& c, const Distribution& p, std::size_t budget,
                            const RngStream& rng, unsigned threads) {
  if (budget == 0) throw ConfigError("budget must be >= 1");
  if (p.dim() != c.dim()) throw ConfigError("distribution and constraint dimensions differ");
  const std::size_t batches = (budget + kBatch - 1) / kBatch;
  std::vector<std::size_t> hits(batches, 0);
  parallel_for(batches, threads, [&](std::size_t b) {
    RngStream stream = rng.derive({b});
    const std::size_t n = std::min(kBatch, budget - b * kBatch);
    std::vector<double> x(c.dim());
    std::size_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      p.sample(stream, x);
      h += c.satisfied(x) ? 1 : 0;
    }
    hits[b] = h;
  });

  EstimateReport r;
  std::size_t total_hits = 0;
  for (std::size_t b = 0; b < batches; ++b) {
    total_hits += hits[b];
    r.n_samples = std::min(budget, (b + 1) * kBatch);
    r.trace.push_back({r.n_samples, static_cast<double>(total_hits) / static_cast<double>(r.n_samples)});
  }
  r.mean = static_cast<double>(total_hits) / static_cast<double>(budget);
  r.variance = r.mean * (1.0 - r.mean) / static_cast<double>(budget);
  return r;
}

double box_mass(const Distribution& p, const Box& box) {
  const auto& marginals = p.marginals();
  if (box.dim() != marginals.size()) throw ConfigError("box dimension does not match distribution");
  double m = 1.0;
  for (std::size_t i = 0; i < box.dim(); ++i)
    m *= interval_mass(marginals[i], box[i].lo(), box[i].hi());
  return m;
}

EstimateReport stratified_estimate(const Constraint& c, const Distribution& p, const Paving& paving,
                                   std::size_t budget, const RngStream& rng, unsigned threads) {
  const auto& marginals = p.marginals();  // throws for correlated inputs
  if (p.dim() != c.dim()) throw ConfigError("distribution and constraint dimensions differ");

  double inner_mass = 0.0;
  for (const auto& b : paving.inner) inner_mass += box_mass(p, b);

  const std::size_t n_outer = paving.outer.size();
  std::vector<double> mass(n_outer);
  for (std::size_t i = 0; i < n_outer; ++i) mass[i] = box_mass(p, paving.outer[i]);
  const double outer_total = std::accumulate(mass.begin(), mass.end(), 0.0);

  std::vector<std::size_t> alloc(n_outer, 0);
  for (std::size_t i = 0; i < n_outer; ++i) {
    if (mass[i] <= 0.0) continue;  // nothing to estimate
    const auto share = static_cast<std::size_t>(std::floor(static_cast<double>(budget) * mass[i] / outer_total));
    alloc[i] = std::max(kMinBoxSamples, share);
  }

  EstimateReport r;
  std::vector<std::size_t> drawn(n_outer, 0), hits(n_outer, 0);
  for (std::size_t round = 0; round < kStratifiedRounds; ++round) {
    parallel_for(n_outer, threads, [&](std::size_t i) {
      const std::size_t target = alloc[i] * (round + 1) / kStratifiedRounds;
      const std::size_t n = target - drawn[i];
      if (n == 0) return;
      RngStream stream = rng.derive({i, round});
      const Box& box = paving.outer[i];
      std::vector<double> x(c.dim());
      std::size_t h = 0;
      for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t d = 0; d < x.size(); ++d)
          x[d] = sample_truncated(marginals[d], box[d].lo(), box[d].hi(), stream);
        h += c.satisfied(x) ? 1 : 0;
      }
      drawn[i] = target;
      hits[i] += h;
    });

    double mean = inner_mass, var = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < n_outer; ++i) {
      used += drawn[i];
      if (drawn[i] == 0) continue;
      const double frac = static_cast<double>(hits[i]) / static_cast<double>(drawn[i]);
      mean += mass[i] * frac;
      var += mass[i] * mass[i] * frac * (1.0 - frac) / static_cast<double>(drawn[i]);
    }
    r.mean = mean;
    r.variance = var;
    r.n_samples = used;
    if (r.trace.empty() || r.trace.back().samples_used < used) r.trace.push_back({used, mean});
  }
  if (r.trace.empty()) r.trace.push_back({0, r.mean});
  if (n_outer == 0) r.mean = inner_mass;
  return r;
}

EstimateReport importance_estimate(const Constraint& c, const Distribution& p,
                                   const Distribution& proposal, std::size_t budget,
                                   const RngStream& rng) {
  if (budget == 0) throw ConfigError("budget must be >= 1");
  if (p.dim() != c.dim() || proposal.dim() != c.dim())
    throw ConfigError("distribution and constraint dimensions differ");
  RngStream stream = rng.derive({0});
  RunningStats stats;
  EstimateReport r;
  std::vector<double> x(c.dim());
  for (std::size_t i = 0; i < budget; ++i) {
    proposal.sample(stream, x);
    const double w = c.satisfied(x) ? std::exp(p.log_pdf(x) - proposal.log_pdf(x)) : 0.0;
    stats.add(w);
    if ((i + 1) % kBatch == 0 || i + 1 == budget) r.trace.push_back({i + 1, stats.mean()});
  }
  r.mean = stats.mean();
  r.variance = stats.sample_variance() / static_cast<double>(budget);
  r.n_samples = budget;
  return r;
}

EstimateReport compose_disjoint_sum(std::span<const EstimateReport> reports) {
  EstimateReport r;
  for (const auto& e : reports) {
    r.mean += e.mean;
    r.variance += e.variance;
    r.n_samples += e.n_samples;
  }
  r.trace.push_back({r.n_samples, r.mean});
  return r;
}

EstimateReport compose_product(std::span<const EstimateReport> reports) {
  EstimateReport r;
  r.mean = 1.0;
  double second_moment = 1.0;
  for (const auto& e : reports) {
    r.mean *= e.mean;
    second_moment *= e.variance + e.mean * e.mean;
    r.n_samples += e.n_samples;
  }
  r.variance = std::max(0.0, second_moment - r.mean * r.mean);
  r.trace.push_back({r.n_samples, r.mean});
  return r;
}

double rae(double estimate, double truth) {
  if (truth == 0.0) throw ConfigError("RAE is undefined for a zero ground truth");
  return std::abs(estimate - truth) / std::abs(truth);
}

}  // namespace paisc
