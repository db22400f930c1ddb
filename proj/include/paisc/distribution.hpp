#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "paisc/error.hpp"
#include "paisc/rng.hpp"

namespace paisc {

// Second parameter is always the standard deviation.
struct Gaussian {
  double loc = 0.0;
  double scale = 1.0;
};
struct StudentT {
  double dof = 1.0;
  double loc = 0.0;
  double scale = 1.0;
};
struct TruncatedGaussian {
  double loc = 0.0;
  double scale = 1.0;
  double lo = 0.0;
  double hi = 1.0;
};
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

using Univariate = std::variant<Gaussian, StudentT, TruncatedGaussian, Uniform>;

// Requested density gradient at or beyond the edge of the support.
class SupportError : public Error {
 public:
  using Error::Error;
};

void validate(const Univariate& u);
double log_pdf(const Univariate& u, double x);
// d/dx log p(x); throws SupportError outside the open support.
double dlog_pdf(const Univariate& u, double x);
double cdf(const Univariate& u, double t);
double sample(const Univariate& u, RngStream& rng);
// Inverse-CDF draw from u restricted to [lo, hi]; throws Error("empty
// truncation") when the restricted mass is below 1e-300.
double sample_truncated(const Univariate& u, double lo, double hi, RngStream& rng);
// Mass of [lo, hi], computed in whichever tail keeps precision.
double interval_mass(const Univariate& u, double lo, double hi);
// Same family shifted by `delta` in location.
Univariate shifted(const Univariate& u, double delta);
std::optional<double> variance(const Univariate& u);
std::string to_string(const Univariate& u);

struct IndependentProduct {
  std::vector<Univariate> components;
};

struct MultivariateGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Univariate whose location is shifted by the value of an earlier variable
// (parent < own index), e.g. y ~ N(x, 0.5) is {Gaussian{0, 0.5}, parent = x}.
struct Factor {
  Univariate dist;
  int parent = -1;
};

struct FactorizedChain {
  std::vector<Factor> factors;
};

struct CovarianceEstimate {
  Eigen::MatrixXd cov;
  // Draws spent estimating it (0 when analytic).
  std::size_t samples_used = 0;
};

// Input distribution p(x).  Immutable; the multivariate Gaussian's Cholesky
// factor is computed once at construction.
class Distribution {
 public:
  using Spec = std::variant<IndependentProduct, MultivariateGaussian, FactorizedChain>;

  explicit Distribution(Spec spec);

  const Spec& spec() const { return spec_; }
  std::size_t dim() const { return dim_; }
  bool is_independent() const { return std::holds_alternative<IndependentProduct>(spec_); }
  // Per-variable marginals; only for independent products.
  const std::vector<Univariate>& marginals() const;

  double log_pdf(std::span<const double> x) const;
  Eigen::VectorXd grad_log_pdf(std::span<const double> x) const;
  Eigen::VectorXd sample(RngStream& rng) const;
  void sample(RngStream& rng, std::span<double> out) const;

  static constexpr std::size_t kCovarianceSamples = 100;
  // Analytic where every component has a finite closed-form variance,
  // otherwise the sample covariance of kCovarianceSamples draws.
  CovarianceEstimate covariance(RngStream& rng) const;

 private:
  Spec spec_;
  std::size_t dim_ = 0;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  double log_norm_ = 0.0;  // MVN: -d/2 log(2 pi) - sum log L_ii
};

}  // namespace paisc
