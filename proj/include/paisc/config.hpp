#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "paisc/bench.hpp"
#include "paisc/distribution.hpp"
#include "paisc/pimais.hpp"

namespace paisc {

// Experiment description read from an INI-style file (sections [problem],
// [domain], [distribution], [mvnormal], [method], [run], [bench]).  Command
// line flags are applied on top of it by the caller.
struct ExperimentConfig {
  // Either a builtin subject name or constraint text plus domain declarations.
  std::string subject;
  std::string constraint;
  std::string domain;  // "name lo hi" lines

  // Per-variable families, in file order, e.g. {"y", "normal(x, 0.5)"}.
  std::vector<std::pair<std::string, std::string>> distribution;
  // Joint Gaussian over all variables in domain order, as text:
  // mean "0 0", cov rows separated by commas "0.2 0.1, 0.1 0.2".
  std::optional<std::pair<std::string, std::string>> mvnormal;

  std::string method = "sympais";
  PimaisConfig pimais;
  std::optional<Kernel> kernel;  // overrides the method's kernel when set
  double paving_accuracy = 1e-2;
  std::size_t paving_max_boxes = 1024;

  std::size_t budget = 1'000'000;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string out;
  std::string format = "text";  // text | json | csv

  std::vector<std::string> bench_subjects;
  std::vector<std::string> bench_methods;
  std::vector<std::size_t> bench_budgets;
  bool timing = false;
};

// Throws ConfigError on unknown sections or keys and on malformed values.
// Relative domain_file paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& file);
// Writes every setting, so that parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig& cfg);

// normal(loc, scale) | student_t(dof, loc, scale) | uniform(lo, hi) |
// truncnormal(loc, scale, lo, hi).  A location given as a variable name
// makes the variable conditional on it; the result is {family, parent}.
Factor parse_factor(const std::string& text, const std::vector<std::string>& vars);

Distribution make_distribution(const ExperimentConfig& cfg, const std::vector<std::string>& vars);
// Builtin subject, or the constraint/domain/distribution triple.
Subject make_subject(const ExperimentConfig& cfg);
// Constraint only (no distribution needed), for paving.
Constraint make_constraint(const ExperimentConfig& cfg);
Method make_method(const ExperimentConfig& cfg, const std::string& name);

}  // namespace paisc
