#include "paisc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <nlohmann/json.hpp>

#include "paisc/error.hpp"
#include "paisc/parallel.hpp"
#include "paisc/paving.hpp"

#ifndef PAISC_SOURCE_FIXTURES
#define PAISC_SOURCE_FIXTURES "fixtures"
#endif

namespace paisc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string domain_lines(const std::vector<std::string>& names, double lo, double hi) {
  std::string out;
  for (const auto& n : names) out += n + " " + fmt(lo) + " " + fmt(hi) + "\n";
  return out;
}

}  // namespace

double sphere_truth(int d) {
  // P(chi2_d(lambda) <= 1) = sum_j Pois(j; lambda/2) P(chi2_{d+2j} <= 1).
  const double half_lambda = 0.5 * d;
  double total = 0.0;
  double log_weight = -half_lambda;  // log Pois(0)
  for (int j = 0; j < 400; ++j) {
    if (j > 0) log_weight += std::log(half_lambda) - std::log(static_cast<double>(j));
    const double term = std::exp(log_weight) * boost::math::gamma_p(0.5 * d + j, 0.5);
    total += term;
    if (j > half_lambda && term < 1e-18 * total) break;
  }
  return total;
}

Subject gen_sphere(int d) {
  if (d < 1) throw ConfigError("sphere dimension must be >= 1");
  std::vector<std::string> names;
  std::string text;
  for (int i = 1; i <= d; ++i) {
    names.push_back("x" + std::to_string(i));
    if (i > 1) text += " + ";
    text += "(x" + std::to_string(i) + " - 1)^2";
  }
  text += " <= 1";
  Constraint c = parse_constraint(text, domain_lines(names, -10, 10));
  Distribution p(IndependentProduct{std::vector<Univariate>(static_cast<std::size_t>(d), Gaussian{0.0, 1.0})});
  return {"sphere-" + std::to_string(d), std::move(c), std::move(p),
          GroundTruth{sphere_truth(d), "analytic", 0, 0}};
}

Subject gen_torus(bool correlated) {
  Constraint c = parse_constraint("(sqrt(x^2 + y^2) - 3)^2 + z^2 <= 1",
                                  domain_lines({"x", "y", "z"}, -5, 5));
  if (!correlated) {
    Distribution p(IndependentProduct{{Gaussian{0.0, 0.5}, Gaussian{0.0, 0.5}, Gaussian{0.0, 0.5}}});
    return {"torus", std::move(c), std::move(p), std::nullopt};
  }
  Distribution p(FactorizedChain{{Factor{StudentT{2.0, 0.0, 0.5}, -1},
                                  Factor{Gaussian{0.0, 0.5}, 0},
                                  Factor{Gaussian{0.0, 0.5}, 0}}});
  return {"torus-correlated", std::move(c), std::move(p), std::nullopt};
}

std::uint32_t ReluNetwork::pattern(std::span<const double> x) const {
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd z = w0 * xv + b0;
  std::uint32_t bits = 0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] >= 0.0) bits |= 1u << i;
  return bits;
}

ReluNetwork make_relu_network(std::size_t d, std::size_t m, std::uint64_t seed) {
  if (d < 1 || m < 1) throw ConfigError("network needs at least one input and one hidden unit");
  RngStream rng(seed, 0);
  ReluNetwork net;
  net.seed = seed;
  net.w0.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
  net.b0.resize(static_cast<Eigen::Index>(m));
  net.w1.resize(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < net.w0.rows(); ++i)
    for (Eigen::Index j = 0; j < net.w0.cols(); ++j) net.w0(i, j) = rng.normal();
  for (auto& v : net.b0) v = rng.normal();
  for (auto& v : net.w1) v = rng.normal();
  net.b1 = rng.normal();
  return net;
}

std::string relu_pattern_name(const ReluNetwork& net, std::uint32_t pattern) {
  std::string bits;
  for (std::size_t i = 0; i < net.hidden(); ++i) bits += (pattern >> i) & 1u ? '1' : '0';
  if (net.seed == kReluNetSeed && net.inputs() == kReluInputs && net.hidden() == kReluHidden)
    return "relu-p" + bits;
  return "relu-" + std::to_string(net.inputs()) + "x" + std::to_string(net.hidden()) + "-s" +
         std::to_string(net.seed) + "-p" + bits;
}

namespace {

Subject relu_subject(const ReluNetwork& net, std::uint32_t pattern) {
  const std::size_t d = net.inputs();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  std::string text;
  for (std::size_t i = 0; i < net.hidden(); ++i) {
    if (i > 0) text += " && ";
    std::string z;
    for (std::size_t j = 0; j < d; ++j) {
      const double w = net.w0(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      z += (w < 0 ? " - " : (j == 0 ? "" : " + ")) + fmt(std::abs(w)) + " * " + names[j];
    }
    const double b = net.b0[static_cast<Eigen::Index>(i)];
    z += (b < 0 ? " - " : " + ") + fmt(std::abs(b));
    text += z + ((pattern >> i) & 1u ? " >= 0" : " < 0");
  }
  Constraint c = parse_constraint(text, domain_lines(names, -100, 100));
  Distribution p(IndependentProduct{std::vector<Univariate>(d, Gaussian{0.0, 1.0})});
  return {relu_pattern_name(net, pattern), std::move(c), std::move(p), std::nullopt};
}

}  // namespace

std::vector<Subject> gen_relu_patterns(std::size_t d, std::size_t m, std::uint64_t net_seed) {
  if (m > 12) throw ConfigError("refusing more than 12 hidden units (2^m subjects)");
  const ReluNetwork net = make_relu_network(d, m, net_seed);
  std::vector<Subject> out;
  for (std::uint32_t p = 0; p < (1u << m); ++p) out.push_back(relu_subject(net, p));
  return out;
}

Subject gen_linear_conjunction(std::size_t d, std::size_t atoms, std::uint64_t seed) {
  if (d < 1 || atoms < 1) throw ConfigError("linear subject needs d >= 1 and at least one atom");
  RngStream rng(seed, 1);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("x" + std::to_string(j + 1));
  std::string text;
  for (std::size_t k = 0; k < atoms; ++k) {
    if (k > 0) text += " && ";
    for (std::size_t j = 0; j < d; ++j) {
      const double a = rng.normal();
      text += (a < 0 ? (j == 0 ? "-" : " - ") : (j == 0 ? "" : " + ")) + fmt(std::abs(a)) + " * " + names[j];
    }
    // Offsets in [0.5, 1.5] keep the origin feasible.
    text += " <= " + fmt(0.5 + rng.uniform());
  }
  Constraint c = parse_constraint(text, domain_lines(names, -10, 10));
  Distribution p(IndependentProduct{std::vector<Univariate>(d, TruncatedGaussian{0.0, 1.0, -10.0, 10.0})});
  return {"linear-" + std::to_string(d) + "x" + std::to_string(atoms) + "-s" + std::to_string(seed),
          std::move(c), std::move(p), std::nullopt};
}

std::vector<std::string> builtin_subject_names() {
  std::vector<std::string> names;
  for (int d = 1; d <= 10; ++d) names.push_back("sphere-" + std::to_string(d));
  names.push_back("torus");
  names.push_back("torus-correlated");
  const ReluNetwork net = make_relu_network(kReluInputs, kReluHidden, kReluNetSeed);
  for (std::uint32_t p = 0; p < (1u << kReluHidden); ++p) names.push_back(relu_pattern_name(net, p));
  names.push_back("linear-<d>x<k>-s<seed>");
  return names;
}

Subject builtin_subject(const std::string& name) {
  std::smatch m;
  if (std::regex_match(name, m, std::regex(R"(sphere-(\d+))"))) {
    const int d = std::stoi(m[1]);
    if (d >= 1 && d <= 64) return gen_sphere(d);
  }
  if (name == "torus") return gen_torus(false);
  if (name == "torus-correlated") return gen_torus(true);
  if (std::regex_match(name, m, std::regex(R"(relu-p([01]{5}))"))) {
    const ReluNetwork net = make_relu_network(kReluInputs, kReluHidden, kReluNetSeed);
    std::uint32_t bits = 0;
    const std::string s = m[1];
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '1') bits |= 1u << i;
    return relu_subject(net, bits);
  }
  if (std::regex_match(name, m, std::regex(R"(linear-(\d+)x(\d+)-s(\d+))")))
    return gen_linear_conjunction(std::stoul(m[1]), std::stoul(m[2]), std::stoull(m[3]));
  std::string known;
  for (const auto& n : builtin_subject_names()) known += " " + n;
  throw ConfigError("unknown subject '" + name + "'; builtins:" + known);
}

std::filesystem::path fixture_dir() {
  if (const char* env = std::getenv("PAISC_FIXTURES"); env && *env) return env;
  return PAISC_SOURCE_FIXTURES;
}

std::map<std::string, GroundTruth> load_truths(const std::filesystem::path& dir) {
  std::map<std::string, GroundTruth> out;
  std::ifstream in(dir / "truths.json");
  if (!in) return out;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed fixture file " + (dir / "truths.json").string() + ": " + e.what());
  }
  for (const auto& e : j) {
    GroundTruth t{e.at("truth").get<double>(), e.at("oracle").get<std::string>(),
                  e.at("oracle_samples").get<std::uint64_t>(), e.at("oracle_seed").get<std::uint64_t>()};
    out[e.at("subject").get<std::string>()] = t;
  }
  return out;
}

void save_truths(const std::filesystem::path& dir, const std::map<std::string, GroundTruth>& truths) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [name, t] : truths)
    j.push_back({{"subject", name},
                 {"truth", t.value},
                 {"oracle", t.oracle},
                 {"oracle_samples", t.oracle_samples},
                 {"oracle_seed", t.oracle_seed}});
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / "truths.json");
  out << j.dump(2) << "\n";
  if (!out) throw Error("could not write " + (dir / "truths.json").string());
}

void attach_truth(Subject& s, const std::map<std::string, GroundTruth>& truths) {
  if (s.truth) return;
  if (auto it = truths.find(s.name); it != truths.end()) s.truth = it->second;
}

std::map<std::string, GroundTruth> relu_truths(const ReluNetwork& net, std::uint64_t samples,
                                               std::uint64_t seed, unsigned threads) {
  constexpr std::uint64_t kBatch = 1 << 16;
  const std::size_t patterns = std::size_t{1} << net.hidden();
  const std::uint64_t batches = (samples + kBatch - 1) / kBatch;
  std::vector<std::vector<std::uint64_t>> counts(batches, std::vector<std::uint64_t>(patterns, 0));
  const RngStream root(seed, 0);
  parallel_for(batches, threads, [&](std::size_t b) {
    RngStream rng = root.derive({b});
    const std::uint64_t n = std::min<std::uint64_t>(kBatch, samples - b * kBatch);
    std::vector<double> x(net.inputs());
    for (std::uint64_t i = 0; i < n; ++i) {
      for (auto& v : x) v = rng.normal();
      ++counts[b][net.pattern(x)];
    }
  });
  std::map<std::string, GroundTruth> out;
  for (std::size_t p = 0; p < patterns; ++p) {
    std::uint64_t hits = 0;
    for (const auto& c : counts) hits += c[p];
    out[relu_pattern_name(net, static_cast<std::uint32_t>(p))] =
        GroundTruth{static_cast<double>(hits) / static_cast<double>(samples), "dmc", samples, seed};
  }
  return out;
}

GroundTruth dmc_truth(const Subject& s, std::uint64_t samples, std::uint64_t seed, unsigned threads) {
  const EstimateReport r = dmc_estimate(s.constraint, s.distribution, samples, RngStream(seed, 0), threads);
  return {r.mean, "dmc", samples, seed};
}

std::vector<std::string> builtin_method_names() { return {"dmc", "stratified", "sympais", "sympais-h"}; }

Method builtin_method(const std::string& name) {
  Method m;
  m.name = name;
  if (name == "dmc" || name == "stratified") return m;
  if (name == "sympais") {
    m.pimais.kernel = Kernel::RwmhTruncated;
    return m;
  }
  if (name == "sympais-h") {
    m.pimais.kernel = Kernel::Hmc;
    return m;
  }
  throw ConfigError("unknown method '" + name + "' (expected dmc, stratified, sympais or sympais-h)");
}

MethodResult run_method(const Subject& s, const Method& m, std::size_t budget, std::uint64_t seed,
                        unsigned threads) {
  MethodResult out;
  const RngStream rng(seed, 0);
  try {
    if (m.name == "dmc") {
      out.report = dmc_estimate(s.constraint, s.distribution, budget, rng, threads);
    } else if (m.name == "stratified") {
      if (!s.distribution.is_independent())
        throw NotApplicableError(
            "stratified sampling needs per-variable CDFs to truncate the inputs; they are "
            "intractable for correlated input distributions");
      const Paving paving = pave(s.constraint, m.paving_accuracy, m.paving_max_boxes);
      out.report = stratified_estimate(s.constraint, s.distribution, paving, budget, rng, threads);
    } else if (m.name == "sympais" || m.name == "sympais-h") {
      PimaisConfig cfg = m.pimais;
      cfg.budget = budget;
      cfg.threads = threads;
      out.report = pimais_run(s.constraint, s.distribution, cfg, rng);
    } else {
      throw ConfigError("unknown method '" + m.name + "'");
    }
  } catch (const NotApplicableError& e) {
    out.status = MethodResult::Status::NotApplicable;
    out.message = e.what();
  } catch (const SeedingError& e) {
    out.status = MethodResult::Status::Failed;
    out.message = e.what();
  }
  return out;
}

std::vector<ResultRow> run_grid(const GridSpec& spec) {
  struct Cell {
    std::size_t subject, method, budget, rep;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < spec.subjects.size(); ++s)
    for (std::size_t m = 0; m < spec.methods.size(); ++m)
      for (std::size_t b = 0; b < spec.budgets.size(); ++b)
        for (std::size_t r = 0; r < spec.repetitions; ++r) cells.push_back({s, m, b, r});

  std::vector<ResultRow> rows(cells.size());
  parallel_for(cells.size(), spec.threads, [&](std::size_t i) {
    const Cell& cell = cells[i];
    const Subject& subject = spec.subjects[cell.subject];
    ResultRow& row = rows[i];
    row.subject = subject.name;
    row.method = spec.methods[cell.method].name;
    row.budget = spec.budgets[cell.budget];
    row.repetition = cell.rep;
    row.seed = mix64(spec.base_seed ^ mix64(i));
    const auto start = std::chrono::steady_clock::now();
    row.result = run_method(subject, spec.methods[cell.method], row.budget, row.seed);
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (row.result.ok() && subject.truth && subject.truth->value != 0.0)
      row.rae = rae(row.result.report.mean, subject.truth->value);
  });
  return rows;
}

std::string results_csv(const std::vector<ResultRow>& rows, bool with_timing) {
  std::ostringstream os;
  os << "subject,method,budget,repetition,seed,samples_used,mean,variance,rae,wall_ms\n";
  for (const auto& r : rows) {
    os << r.subject << ',' << r.method << ',' << r.budget << ',' << r.repetition << ',' << r.seed << ',';
    if (r.result.ok()) {
      os << r.result.report.n_samples << ',' << fmt(r.result.report.mean) << ','
         << fmt(r.result.report.variance) << ',' << (r.rae ? fmt(*r.rae) : "NA");
    } else {
      os << "0,NA,NA,NA";
    }
    os << ',';
    if (with_timing) os << fmt(std::round(r.wall_ms * 1000.0) / 1000.0);
    os << '\n';
  }
  return os.str();
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string summary_table(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<double>> raes;
  std::map<std::pair<std::string, std::string>, std::string> notes;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.subject, r.method);
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
    if (r.rae) raes[key].push_back(*r.rae);
    if (!r.result.ok())
      notes[key] = r.result.status == MethodResult::Status::NotApplicable ? "not applicable" : "failed";
  }
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-24s %-12s %6s %14s\n", "subject", "method", "runs", "median RAE");
  os << line;
  for (const auto& key : keys) {
    const auto& v = raes[key];
    if (v.empty()) {
      const std::string note = notes.count(key) ? notes[key] : "no truth";
      std::snprintf(line, sizeof line, "%-24s %-12s %6s %14s\n", key.first.c_str(),
                    key.second.c_str(), "-", note.c_str());
    } else {
      std::snprintf(line, sizeof line, "%-24s %-12s %6zu %14.4g\n", key.first.c_str(),
                    key.second.c_str(), v.size(), median(v));
    }
    os << line;
  }
  return os.str();
}

}  // namespace paisc
