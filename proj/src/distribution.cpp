#include "paisc/distribution.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace paisc {

namespace bm = boost::math;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr double kInf = std::numeric_limits<double>::infinity();

// Standard-normal CDF and survival function.
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double phi_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double gaussian_mass(double a, double b) {
  // a, b standardized.
  if (a >= 0.0) return phi_sf(a) - phi_sf(b);
  if (b <= 0.0) return phi_cdf(b) - phi_cdf(a);
  return 1.0 - phi_cdf(a) - phi_sf(b);
}

// Location-scale family with a standardized CDF, SF and their inverses.
struct Standard {
  double (*cdf)(double, double);
  double (*sf)(double, double);
  double (*quantile)(double, double);
  double (*quantile_sf)(double, double);
  double param;  // dof for Student t, unused for normal
};

double n_cdf(double z, double) { return phi_cdf(z); }
double n_sf(double z, double) { return phi_sf(z); }
double n_q(double p, double) { return bm::quantile(bm::normal(), p); }
double n_qsf(double s, double) { return bm::quantile(bm::complement(bm::normal(), s)); }
double t_cdf(double z, double nu) { return bm::cdf(bm::students_t(nu), z); }
double t_sf(double z, double nu) { return bm::cdf(bm::complement(bm::students_t(nu), z)); }
double t_q(double p, double nu) { return bm::quantile(bm::students_t(nu), p); }
double t_qsf(double s, double nu) { return bm::quantile(bm::complement(bm::students_t(nu), s)); }

double clamp_quantile(double q) { return std::min(std::max(q, 1e-320), 1.0 - 1e-17); }

// Draw from a standardized family restricted to [a, b].
double standard_truncated(const Standard& f, double a, double b, double u) {
  const double fa = std::isinf(a) ? 0.0 : f.cdf(a, f.param);
  if (fa > 0.5) {
    const double sa = f.sf(a, f.param);
    const double sb = std::isinf(b) ? 0.0 : f.sf(b, f.param);
    const double mass = sa - sb;
    if (!(mass >= 1e-300)) throw Error("empty truncation");
    const double z = f.quantile_sf(clamp_quantile(sb + u * mass), f.param);
    return std::min(std::max(z, a), b);
  }
  const double fb = std::isinf(b) ? 1.0 : f.cdf(b, f.param);
  const double mass = fb - fa;
  if (!(mass >= 1e-300)) throw Error("empty truncation");
  const double z = f.quantile(clamp_quantile(fa + u * mass), f.param);
  return std::min(std::max(z, a), b);
}

double standard_mass(const Standard& f, double a, double b) {
  if (!(a < b)) return 0.0;
  const double fa = std::isinf(a) ? 0.0 : f.cdf(a, f.param);
  if (fa > 0.5) return f.sf(a, f.param) - (std::isinf(b) ? 0.0 : f.sf(b, f.param));
  return (std::isinf(b) ? 1.0 : f.cdf(b, f.param)) - fa;
}

const Standard kNormal{n_cdf, n_sf, n_q, n_qsf, 0.0};
Standard student(double nu) { return {t_cdf, t_sf, t_q, t_qsf, nu}; }

double truncated_log_norm(const TruncatedGaussian& g) {
  return std::log(gaussian_mass((g.lo - g.loc) / g.scale, (g.hi - g.loc) / g.scale));
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void validate(const Univariate& u) {
  std::visit(overloaded{
                 [](const Gaussian& g) { require(g.scale > 0.0, "gaussian scale must be > 0"); },
                 [](const StudentT& t) {
                   require(t.scale > 0.0, "student-t scale must be > 0");
                   require(t.dof > 0.0, "student-t dof must be > 0");
                 },
                 [](const TruncatedGaussian& g) {
                   require(g.scale > 0.0, "truncated gaussian scale must be > 0");
                   require(g.lo < g.hi, "truncated gaussian needs lo < hi");
                   require(gaussian_mass((g.lo - g.loc) / g.scale, (g.hi - g.loc) / g.scale) > 0.0,
                           "truncated gaussian has no mass on [lo, hi]");
                 },
                 [](const Uniform& v) {
                   require(v.lo < v.hi && std::isfinite(v.lo) && std::isfinite(v.hi),
                           "uniform needs finite lo < hi");
                 },
             },
             u);
}

double log_pdf(const Univariate& u, double x) {
  if (std::isnan(x)) throw Error("log_pdf of NaN");
  return std::visit(
      overloaded{
          [x](const Gaussian& g) {
            const double z = (x - g.loc) / g.scale;
            return -0.5 * z * z - std::log(g.scale) - kLogSqrt2Pi;
          },
          [x](const StudentT& t) {
            const double z = (x - t.loc) / t.scale;
            const double nu = t.dof;
            return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
                   0.5 * std::log(nu * std::numbers::pi) - std::log(t.scale) -
                   0.5 * (nu + 1.0) * std::log1p(z * z / nu);
          },
          [x](const TruncatedGaussian& g) {
            if (x < g.lo || x > g.hi) return -kInf;
            const double z = (x - g.loc) / g.scale;
            return -0.5 * z * z - std::log(g.scale) - kLogSqrt2Pi - truncated_log_norm(g);
          },
          [x](const Uniform& v) {
            if (x < v.lo || x > v.hi) return -kInf;
            return -std::log(v.hi - v.lo);
          },
      },
      u);
}

double dlog_pdf(const Univariate& u, double x) {
  return std::visit(
      overloaded{
          [x](const Gaussian& g) { return -(x - g.loc) / (g.scale * g.scale); },
          [x](const StudentT& t) {
            const double z = (x - t.loc) / t.scale;
            return -(t.dof + 1.0) * z / (t.dof + z * z) / t.scale;
          },
          [x](const TruncatedGaussian& g) {
            if (!(x > g.lo && x < g.hi)) throw SupportError("gradient requested outside support");
            return -(x - g.loc) / (g.scale * g.scale);
          },
          [x](const Uniform& v) {
            if (!(x > v.lo && x < v.hi)) throw SupportError("gradient requested outside support");
            return 0.0;
          },
      },
      u);
}

double cdf(const Univariate& u, double t) {
  if (std::isnan(t)) throw Error("cdf of NaN");
  return std::visit(
      overloaded{
          [t](const Gaussian& g) { return phi_cdf((t - g.loc) / g.scale); },
          [t](const StudentT& s) {
            if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
            return t_cdf((t - s.loc) / s.scale, s.dof);
          },
          [t](const TruncatedGaussian& g) {
            if (t <= g.lo) return 0.0;
            if (t >= g.hi) return 1.0;
            const double a = (g.lo - g.loc) / g.scale;
            return gaussian_mass(a, (t - g.loc) / g.scale) /
                   gaussian_mass(a, (g.hi - g.loc) / g.scale);
          },
          [t](const Uniform& v) {
            if (t <= v.lo) return 0.0;
            if (t >= v.hi) return 1.0;
            return (t - v.lo) / (v.hi - v.lo);
          },
      },
      u);
}

double interval_mass(const Univariate& u, double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  return std::visit(
      overloaded{
          [&](const Gaussian& g) {
            return gaussian_mass((lo - g.loc) / g.scale, (hi - g.loc) / g.scale);
          },
          [&](const StudentT& s) {
            return standard_mass(student(s.dof), (lo - s.loc) / s.scale, (hi - s.loc) / s.scale);
          },
          [&](const TruncatedGaussian& g) {
            const double a = std::max(lo, g.lo), b = std::min(hi, g.hi);
            if (!(a < b)) return 0.0;
            return gaussian_mass((a - g.loc) / g.scale, (b - g.loc) / g.scale) /
                   std::exp(truncated_log_norm(g));
          },
          [&](const Uniform& v) {
            const double a = std::max(lo, v.lo), b = std::min(hi, v.hi);
            return a < b ? (b - a) / (v.hi - v.lo) : 0.0;
          },
      },
      u);
}

double sample(const Univariate& u, RngStream& rng) {
  return std::visit(
      overloaded{
          [&](const Gaussian& g) { return g.loc + g.scale * rng.normal(); },
          [&](const StudentT& t) {
            return t.loc + t.scale * std::student_t_distribution<double>(t.dof)(rng);
          },
          [&](const TruncatedGaussian& g) { return sample_truncated(g, g.lo, g.hi, rng); },
          [&](const Uniform& v) { return v.lo + rng.uniform() * (v.hi - v.lo); },
      },
      u);
}

double sample_truncated(const Univariate& u, double lo, double hi, RngStream& rng) {
  if (!(lo < hi)) throw Error("empty truncation");
  const double r = rng.uniform();
  return std::visit(
      overloaded{
          [&](const Gaussian& g) {
            return g.loc + g.scale * standard_truncated(kNormal, (lo - g.loc) / g.scale,
                                                        (hi - g.loc) / g.scale, r);
          },
          [&](const StudentT& t) {
            return t.loc + t.scale * standard_truncated(student(t.dof), (lo - t.loc) / t.scale,
                                                        (hi - t.loc) / t.scale, r);
          },
          [&](const TruncatedGaussian& g) {
            const double a = std::max(lo, g.lo), b = std::min(hi, g.hi);
            if (!(a < b)) throw Error("empty truncation");
            return g.loc + g.scale * standard_truncated(kNormal, (a - g.loc) / g.scale,
                                                        (b - g.loc) / g.scale, r);
          },
          [&](const Uniform& v) {
            const double a = std::max(lo, v.lo), b = std::min(hi, v.hi);
            if (!(a < b)) throw Error("empty truncation");
            return a + r * (b - a);
          },
      },
      u);
}

Univariate shifted(const Univariate& u, double delta) {
  return std::visit(overloaded{
                        [delta](Gaussian g) -> Univariate {
                          g.loc += delta;
                          return g;
                        },
                        [delta](StudentT t) -> Univariate {
                          t.loc += delta;
                          return t;
                        },
                        [delta](TruncatedGaussian g) -> Univariate {
                          g.loc += delta;
                          g.lo += delta;
                          g.hi += delta;
                          return g;
                        },
                        [delta](Uniform v) -> Univariate {
                          v.lo += delta;
                          v.hi += delta;
                          return v;
                        },
                    },
                    u);
}

std::optional<double> variance(const Univariate& u) {
  return std::visit(
      overloaded{
          [](const Gaussian& g) -> std::optional<double> { return g.scale * g.scale; },
          [](const StudentT& t) -> std::optional<double> {
            if (t.dof <= 2.0) return std::nullopt;
            return t.scale * t.scale * t.dof / (t.dof - 2.0);
          },
          [](const TruncatedGaussian& g) -> std::optional<double> {
            const double a = (g.lo - g.loc) / g.scale, b = (g.hi - g.loc) / g.scale;
            const double z = gaussian_mass(a, b);
            auto pdf = [](double s) { return std::isinf(s) ? 0.0 : std::exp(-0.5 * s * s - kLogSqrt2Pi); };
            auto spdf = [&](double s) { return std::isinf(s) ? 0.0 : s * pdf(s); };
            const double m = (pdf(a) - pdf(b)) / z;
            return g.scale * g.scale * (1.0 + (spdf(a) - spdf(b)) / z - m * m);
          },
          [](const Uniform& v) -> std::optional<double> {
            return (v.hi - v.lo) * (v.hi - v.lo) / 12.0;
          },
      },
      u);
}

std::string to_string(const Univariate& u) {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const Gaussian& g) { os << "normal(" << g.loc << ", " << g.scale << ")"; },
                 [&](const StudentT& t) {
                   os << "student_t(" << t.dof << ", " << t.loc << ", " << t.scale << ")";
                 },
                 [&](const TruncatedGaussian& g) {
                   os << "truncnormal(" << g.loc << ", " << g.scale << ", " << g.lo << ", " << g.hi
                      << ")";
                 },
                 [&](const Uniform& v) { os << "uniform(" << v.lo << ", " << v.hi << ")"; },
             },
             u);
  return os.str();
}

Distribution::Distribution(Spec spec) : spec_(std::move(spec)) {
  std::visit(overloaded{
                 [this](const IndependentProduct& p) {
                   for (const auto& c : p.components) validate(c);
                   dim_ = p.components.size();
                 },
                 [this](const MultivariateGaussian& g) {
                   dim_ = static_cast<std::size_t>(g.mean.size());
                   require(g.cov.rows() == g.mean.size() && g.cov.cols() == g.mean.size(),
                           "covariance shape does not match mean");
                   require(g.cov.isApprox(g.cov.transpose(), 1e-12), "covariance is not symmetric");
                   chol_.compute(g.cov);
                   require(chol_.info() == Eigen::Success, "covariance is not positive definite");
                   const Eigen::MatrixXd l = chol_.matrixL();
                   log_norm_ = -static_cast<double>(dim_) * kLogSqrt2Pi -
                               l.diagonal().array().log().sum();
                 },
                 [this](const FactorizedChain& c) {
                   for (std::size_t i = 0; i < c.factors.size(); ++i) {
                     validate(c.factors[i].dist);
                     require(c.factors[i].parent < static_cast<int>(i),
                             "chain factors may only reference earlier variables");
                   }
                   dim_ = c.factors.size();
                 },
             },
             spec_);
  require(dim_ >= 1, "distribution has no variables");
}

const std::vector<Univariate>& Distribution::marginals() const {
  if (const auto* p = std::get_if<IndependentProduct>(&spec_)) return p->components;
  throw NotApplicableError("per-variable CDFs are intractable for correlated inputs");
}

double Distribution::log_pdf(std::span<const double> x) const {
  if (x.size() != dim_) throw Error("dimension mismatch in log_pdf");
  return std::visit(
      overloaded{
          [&](const IndependentProduct& p) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) s += paisc::log_pdf(p.components[i], x[i]);
            return s;
          },
          [&](const MultivariateGaussian& g) {
            for (double v : x)
              if (std::isnan(v)) throw Error("log_pdf of NaN");
            const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(dim_));
            const Eigen::VectorXd z = chol_.matrixL().solve(xv - g.mean);
            return log_norm_ - 0.5 * z.squaredNorm();
          },
          [&](const FactorizedChain& c) {
            double s = 0.0;
            for (std::size_t i = 0; i < dim_; ++i) {
              const auto& f = c.factors[i];
              const double shift = f.parent >= 0 ? x[f.parent] : 0.0;
              s += paisc::log_pdf(f.dist, x[i] - shift);
            }
            return s;
          },
      },
      spec_);
}

Eigen::VectorXd Distribution::grad_log_pdf(std::span<const double> x) const {
  if (x.size() != dim_) throw Error("dimension mismatch in grad_log_pdf");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  std::visit(overloaded{
                 [&](const IndependentProduct& p) {
                   for (std::size_t i = 0; i < dim_; ++i) g[i] = dlog_pdf(p.components[i], x[i]);
                 },
                 [&](const MultivariateGaussian& m) {
                   const Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                                              static_cast<Eigen::Index>(dim_));
                   g = -chol_.solve(xv - m.mean);
                 },
                 [&](const FactorizedChain& c) {
                   for (std::size_t i = 0; i < dim_; ++i) {
                     const auto& f = c.factors[i];
                     const double shift = f.parent >= 0 ? x[f.parent] : 0.0;
                     const double d = dlog_pdf(f.dist, x[i] - shift);
                     g[i] += d;
                     if (f.parent >= 0) g[f.parent] -= d;
                   }
                 },
             },
             spec_);
  return g;
}

void Distribution::sample(RngStream& rng, std::span<double> out) const {
  std::visit(overloaded{
                 [&](const IndependentProduct& p) {
                   for (std::size_t i = 0; i < dim_; ++i) out[i] = paisc::sample(p.components[i], rng);
                 },
                 [&](const MultivariateGaussian& m) {
                   Eigen::VectorXd z(static_cast<Eigen::Index>(dim_));
                   for (auto& v : z) v = rng.normal();
                   const Eigen::VectorXd x = m.mean + chol_.matrixL() * z;
                   for (std::size_t i = 0; i < dim_; ++i) out[i] = x[i];
                 },
                 [&](const FactorizedChain& c) {
                   for (std::size_t i = 0; i < dim_; ++i) {
                     const auto& f = c.factors[i];
                     const double shift = f.parent >= 0 ? out[f.parent] : 0.0;
                     out[i] = shift + paisc::sample(f.dist, rng);
                   }
                 },
             },
             spec_);
}

Eigen::VectorXd Distribution::sample(RngStream& rng) const {
  Eigen::VectorXd x(static_cast<Eigen::Index>(dim_));
  sample(rng, std::span<double>(x.data(), dim_));
  return x;
}

CovarianceEstimate Distribution::covariance(RngStream& rng) const {
  const auto n = static_cast<Eigen::Index>(dim_);
  if (const auto* m = std::get_if<MultivariateGaussian>(&spec_)) return {m->cov, 0};
  if (const auto* p = std::get_if<IndependentProduct>(&spec_)) {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
    bool analytic = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto v = variance(p->components[static_cast<std::size_t>(i)]);
      if (!v) {
        analytic = false;
        break;
      }
      cov(i, i) = *v;
    }
    if (analytic) return {cov, 0};
  }
  Eigen::MatrixXd draws(static_cast<Eigen::Index>(kCovarianceSamples), n);
  for (Eigen::Index r = 0; r < draws.rows(); ++r) draws.row(r) = sample(rng).transpose();
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(draws.rows() - 1);
  return {cov, kCovarianceSamples};
}

}  // namespace paisc
