#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "paisc/constraint.hpp"
#include "paisc/distribution.hpp"
#include "paisc/estimators.hpp"
#include "paisc/pimais.hpp"

namespace paisc {

struct GroundTruth {
  double value = 0.0;
  std::string oracle;  // "analytic" or "dmc"
  std::uint64_t oracle_samples = 0;
  std::uint64_t oracle_seed = 0;
};

struct Subject {
  std::string name;
  Constraint constraint;
  Distribution distribution;
  std::optional<GroundTruth> truth;
};

// ||x - 1||^2 <= 1 on [-10, 10]^d with x ~ N(0, I).  Ground truth is the
// noncentral chi-square CDF P(chi2_d(lambda = d) <= 1).
Subject gen_sphere(int d);
double sphere_truth(int d);

// (sqrt(x^2 + y^2) - 3)^2 + z^2 <= 1 on [-5, 5]^3.  Independent inputs are
// N(0, 0.5) each; correlated inputs are x ~ T2(0, 0.5), y ~ N(x, 0.5),
// z ~ N(x, 0.5).  Truth comes from the fixture file.
Subject gen_torus(bool correlated);

// One hidden ReLU layer, z = W0 x + b0, a = relu(z), y = W1^T a + b1.
struct ReluNetwork {
  Eigen::MatrixXd w0;  // m x d
  Eigen::VectorXd b0;  // m
  Eigen::VectorXd w1;  // m
  double b1 = 0.0;
  std::uint64_t seed = 0;

  std::size_t inputs() const { return static_cast<std::size_t>(w0.cols()); }
  std::size_t hidden() const { return static_cast<std::size_t>(w0.rows()); }
  // Bit i set iff z_i >= 0.
  std::uint32_t pattern(std::span<const double> x) const;
};

ReluNetwork make_relu_network(std::size_t d, std::size_t m, std::uint64_t seed);
std::string relu_pattern_name(const ReluNetwork& net, std::uint32_t pattern);
// One subject per activation pattern (2^m of them), inputs N(0, 1) on
// [-100, 100]^d.  Refuses m > 12.
std::vector<Subject> gen_relu_patterns(std::size_t d, std::size_t m, std::uint64_t net_seed);

// Synthetic stand-in for linear path conditions: `atoms` random half-spaces
// a.x <= b through a neighbourhood of the origin over truncated-Gaussian
// inputs on [-10, 10]^d.
Subject gen_linear_conjunction(std::size_t d, std::size_t atoms, std::uint64_t seed);

inline constexpr std::uint64_t kReluNetSeed = 2021;
inline constexpr std::size_t kReluInputs = 5;
inline constexpr std::size_t kReluHidden = 5;

// Builtin subjects by name: sphere-<d>, torus, torus-correlated,
// relu-p<bits> (the builtin 5x5 network), linear-<d>x<k>-s<seed>.
std::vector<std::string> builtin_subject_names();
Subject builtin_subject(const std::string& name);

// Ground-truth fixtures: truths.json under the fixture directory, a list of
// {subject, truth, oracle, oracle_samples, oracle_seed}.
std::filesystem::path fixture_dir();  // PAISC_FIXTURES or the source tree copy
std::map<std::string, GroundTruth> load_truths(const std::filesystem::path& dir);
void save_truths(const std::filesystem::path& dir, const std::map<std::string, GroundTruth>& truths);
// Attaches the cached truth (or the analytic one) when available.
void attach_truth(Subject& s, const std::map<std::string, GroundTruth>& truths);

// Brute-force truths for every ReLU pattern in one pass of hit-or-miss
// sampling over the input distribution.
std::map<std::string, GroundTruth> relu_truths(const ReluNetwork& net, std::uint64_t samples,
                                               std::uint64_t seed, unsigned threads);
GroundTruth dmc_truth(const Subject& s, std::uint64_t samples, std::uint64_t seed, unsigned threads);

// Estimation method applied to a subject within the grid.
struct Method {
  std::string name;  // dmc | stratified | sympais | sympais-h
  PimaisConfig pimais;
  double paving_accuracy = 1e-2;
  std::size_t paving_max_boxes = 1024;
};
Method builtin_method(const std::string& name);
std::vector<std::string> builtin_method_names();

struct MethodResult {
  enum class Status { Ok, NotApplicable, Failed };
  Status status = Status::Ok;
  std::string message;  // why the method did not run
  EstimateReport report;
  bool ok() const { return status == Status::Ok; }
};

// Runs one method on one subject.  NotApplicableError becomes
// Status::NotApplicable and SeedingError becomes Status::Failed; other
// errors propagate.
MethodResult run_method(const Subject& s, const Method& m, std::size_t budget, std::uint64_t seed,
                        unsigned threads = 1);

struct ResultRow {
  std::string subject;
  std::string method;
  std::size_t budget = 0;
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  MethodResult result;
  std::optional<double> rae;
  double wall_ms = 0.0;
};

struct GridSpec {
  std::vector<Subject> subjects;
  std::vector<Method> methods;
  std::vector<std::size_t> budgets;
  std::size_t repetitions = 1;
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
};

// Cross product subjects x methods x budgets x repetitions, one independent
// job per cell seeded from (base_seed, cell index).  Rows come back in cell
// order whatever the thread count.
std::vector<ResultRow> run_grid(const GridSpec& spec);

// subject,method,budget,repetition,seed,samples_used,mean,variance,rae,wall_ms
// Not-applicable cells carry NA in mean/variance/rae.  wall_ms is left empty
// unless `with_timing`, so reruns are byte-identical.
std::string results_csv(const std::vector<ResultRow>& rows, bool with_timing = false);
// Median RAE per (subject, method).
std::string summary_table(const std::vector<ResultRow>& rows);

double median(std::vector<double> v);

}  // namespace paisc
