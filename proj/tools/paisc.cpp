// paisc: estimate, pave, bench and make-truth front end.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "paisc/bench.hpp"
#include "paisc/config.hpp"
#include "paisc/error.hpp"
#include "paisc/paving.hpp"
#include "paisc/report.hpp"

namespace {

using namespace paisc;

constexpr int kExitConfig = 2;
constexpr int kExitSeeding = 3;
constexpr int kExitNotApplicable = 4;

struct Flags {
  std::string config;
  std::string subject;
  std::string constraint;
  std::string domain_file;
  std::vector<std::string> dists;
  std::string method;
  std::string kernel;
  std::string seed_strategy;
  std::uint64_t seed = 0;
  std::size_t budget = 0;
  std::size_t repetitions = 0;
  unsigned threads = 0;
  double accuracy = 0.0;
  std::size_t max_boxes = 0;
  bool json = false;
  std::string out;

  std::vector<std::string> subjects;
  std::vector<std::string> suites;
  std::vector<std::string> methods;
  std::vector<std::size_t> budgets;
  bool timing = false;

  std::uint64_t truth_samples = 100'000'000;
  std::string fixtures;

  // Options given on the command line, by long name.
  std::multimap<std::string, CLI::Option*> opts;
  bool given(const std::string& name) const {
    const auto [b, e] = opts.equal_range(name);
    for (auto it = b; it != e; ++it)
      if (it->second->count() > 0) return true;
    return false;
  }
  void add(const std::string& name, CLI::Option* o) { opts.emplace(name, o); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Config file first, then flags on top.
ExperimentConfig resolve(const Flags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (f.given("subject")) {
    c.subject = f.subject;
    c.constraint.clear();
  }
  if (f.given("constraint")) {
    c.constraint = f.constraint;
    c.subject.clear();
  }
  if (f.given("domain")) c.domain = read_file(f.domain_file);
  if (f.given("dist")) {
    c.distribution.clear();
    c.mvnormal.reset();
    for (const auto& d : f.dists) {
      const auto eq = d.find('=');
      if (eq == std::string::npos) throw ConfigError("--dist expects name=family(args), got '" + d + "'");
      c.distribution.emplace_back(d.substr(0, eq), d.substr(eq + 1));
    }
  }
  if (f.given("method")) c.method = f.method;
  if (f.given("kernel")) c.kernel = parse_kernel(f.kernel);
  if (f.given("seed-strategy")) c.pimais.seed_strategy = parse_seed_strategy(f.seed_strategy);
  if (f.given("seed")) c.seed = f.seed;
  if (f.given("budget")) c.budget = f.budget;
  if (f.given("repetitions")) c.repetitions = f.repetitions;
  if (f.given("threads")) c.threads = f.threads;
  if (f.given("accuracy")) c.paving_accuracy = f.accuracy;
  if (f.given("max-boxes")) c.paving_max_boxes = f.max_boxes;
  if (f.given("out")) c.out = f.out;
  if (f.json) c.format = "json";
  if (f.given("subjects")) c.bench_subjects = f.subjects;
  if (f.given("methods")) c.bench_methods = f.methods;
  if (f.given("budgets")) c.bench_budgets = f.budgets;
  if (f.timing) c.timing = true;
  if (c.threads == 0) throw ConfigError("--threads must be >= 1");
  if (c.budget == 0) throw ConfigError("--budget must be >= 1");
  c.pimais.validate();
  return c;
}

void emit(const ExperimentConfig& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream o(c.out, std::ios::binary);
  if (!o) throw ConfigError("cannot write " + c.out);
  o << text;
}

int cmd_estimate(const Flags& f) {
  const ExperimentConfig c = resolve(f);
  const Subject s = make_subject(c);
  const Method m = make_method(c, c.method);

  const auto start = std::chrono::steady_clock::now();
  const MethodResult r = run_method(s, m, c.budget, c.seed, c.threads);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (r.status == MethodResult::Status::NotApplicable) {
    std::cerr << "paisc: " << m.name << " is not applicable to " << s.name << ": " << r.message << '\n';
    return kExitNotApplicable;
  }
  if (r.status == MethodResult::Status::Failed) {
    std::cerr << "paisc: " << r.message << '\n';
    return kExitSeeding;
  }

  ReportMeta meta{m.name, s.name, c.seed, s.truth ? std::optional(s.truth->value) : std::nullopt, ms};
  std::string text;
  if (c.format == "json") {
    text = report_to_json(r.report, meta).dump(2) + "\n";
  } else if (c.format == "csv") {
    text = report_csv_header() + report_csv_row(r.report, meta);
  } else {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "subject    %s\nmethod     %s\nseed       %llu\nmean       %.17g\nvariance   %.17g\n"
                  "samples    %zu\nruntime_ms %.3f\n",
                  s.name.c_str(), m.name.c_str(), static_cast<unsigned long long>(c.seed), r.report.mean,
                  r.report.variance, r.report.n_samples, ms);
    text = buf;
    if (meta.truth) {
      std::snprintf(buf, sizeof buf, "truth      %.17g\nrae        %.6g\n", *meta.truth,
                    rae(r.report.mean, *meta.truth));
      text += buf;
    }
  }
  emit(c, text);
  return 0;
}

int cmd_pave(const Flags& f) {
  const ExperimentConfig c = resolve(f);
  const Constraint con = make_constraint(c);
  if (!(c.paving_accuracy > 0.0)) throw ConfigError("--accuracy must be > 0");
  if (c.paving_max_boxes == 0) throw ConfigError("--max-boxes must be >= 1");
  const Paving p = pave(con, c.paving_accuracy, c.paving_max_boxes);
  emit(c, paving_to_json(p, con).dump(1) + "\n");
  if (!c.out.empty())
    std::cerr << "paisc: " << p.inner.size() << " inner, " << p.outer.size() << " outer boxes"
              << (p.exhausted ? "" : " (box budget reached)") << '\n';
  return 0;
}

std::vector<std::string> suite_subjects(const std::string& suite) {
  if (suite == "sphere") return {"sphere-2", "sphere-4", "sphere-6", "sphere-8", "sphere-10"};
  if (suite == "torus") return {"torus", "torus-correlated"};
  if (suite == "relu") {
    std::vector<std::string> out;
    for (const auto& n : builtin_subject_names())
      if (n.rfind("relu-", 0) == 0) out.push_back(n);
    return out;
  }
  throw ConfigError("unknown suite '" + suite + "' (expected sphere, torus or relu)");
}

int cmd_bench(const Flags& f) {
  ExperimentConfig c = resolve(f);
  std::vector<std::string> names = c.bench_subjects;
  for (const auto& s : f.suites)
    for (auto& n : suite_subjects(s)) names.push_back(std::move(n));
  if (names.empty()) throw ConfigError("no subjects given (use --subjects or --suite)");
  std::vector<std::string> methods = c.bench_methods;
  if (methods.empty()) methods = builtin_method_names();
  std::vector<std::size_t> budgets = c.bench_budgets;
  if (budgets.empty()) budgets = {c.budget};

  GridSpec spec;
  const auto truths = load_truths(fixture_dir());
  for (const auto& n : names) {
    Subject s = builtin_subject(n);
    attach_truth(s, truths);
    spec.subjects.push_back(std::move(s));
  }
  for (const auto& m : methods) spec.methods.push_back(make_method(c, m));
  spec.budgets = budgets;
  spec.repetitions = c.repetitions;
  spec.base_seed = c.seed;
  spec.threads = c.threads;

  const auto rows = run_grid(spec);
  emit(c, results_csv(rows, c.timing));
  (c.out.empty() ? std::cerr : std::cout) << summary_table(rows);
  return 0;
}

int cmd_make_truth(const Flags& f) {
  const ExperimentConfig c = resolve(f);
  const std::filesystem::path dir = f.fixtures.empty() ? fixture_dir() : std::filesystem::path(f.fixtures);
  auto truths = load_truths(dir);
  std::vector<std::string> names = c.bench_subjects;
  if (names.empty()) names = {"torus", "torus-correlated", "relu"};
  for (const auto& n : names) {
    const auto start = std::chrono::steady_clock::now();
    if (n == "relu") {
      const ReluNetwork net = make_relu_network(kReluInputs, kReluHidden, kReluNetSeed);
      for (auto& [k, t] : relu_truths(net, f.truth_samples, c.seed, c.threads)) truths[k] = t;
    } else {
      const Subject s = builtin_subject(n);
      truths[n] = dmc_truth(s, f.truth_samples, c.seed, c.threads);
    }
    std::cerr << "paisc: " << n << " done in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() << " s\n";
  }
  std::filesystem::create_directories(dir);
  save_truths(dir, truths);
  std::cerr << "paisc: wrote " << (dir / "truths.json").string() << '\n';
  return 0;
}

void add_problem_flags(CLI::App* cmd, Flags& f) {
  f.add("subject", cmd->add_option("--subject", f.subject, "Builtin subject (sphere-<d>, torus, torus-correlated, relu-p<bits>, linear-<d>x<k>-s<seed>)"));
  f.add("constraint", cmd->add_option("--constraint", f.constraint, "Constraint text, e.g. \"x*x + y*y <= 1\""));
  f.add("domain", cmd->add_option("--domain", f.domain_file, "Domain declaration file, one `name lo hi` per line"));
}

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "Experiment config file (flags override its values)");
  f.add("seed", cmd->add_option("--seed", f.seed, "Base random seed"));
  f.add("threads", cmd->add_option("--threads", f.threads, "Worker threads (results do not depend on it)"));
  f.add("out", cmd->add_option("--out", f.out, "Output file (default: stdout)"));
}

void add_method_flags(CLI::App* cmd, Flags& f) {
  f.add("budget", cmd->add_option("--budget", f.budget, "Sample budget per run"));
  f.add("method", cmd->add_option("--method", f.method, "dmc | stratified | sympais | sympais-h"));
  f.add("kernel", cmd->add_option("--kernel", f.kernel, "MCMC kernel override: rwmh | rwmh-truncated | hmc"));
  f.add("seed-strategy", cmd->add_option("--seed-strategy", f.seed_strategy, "single | diverse | diverse+resample"));
  f.add("accuracy", cmd->add_option("--accuracy", f.accuracy, "Paving accuracy (max normalized box width)"));
  f.add("max-boxes", cmd->add_option("--max-boxes", f.max_boxes, "Paving box budget"));
  cmd->add_flag("--json", f.json, "Write JSON instead of text");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probability estimation for numeric path conditions"};
  app.require_subcommand(1);
  Flags f;

  auto* est = app.add_subcommand("estimate", "Estimate the probability of one constraint");
  add_common_flags(est, f);
  add_problem_flags(est, f);
  add_method_flags(est, f);
  f.add("dist", est->add_option("--dist", f.dists, "Input distribution per variable, name=family(args); repeatable"));

  auto* pv = app.add_subcommand("pave", "Inner/outer box paving of a constraint as JSON");
  add_common_flags(pv, f);
  add_problem_flags(pv, f);
  f.add("accuracy", pv->add_option("--accuracy", f.accuracy, "Max normalized box width (default 0.01)"));
  f.add("max-boxes", pv->add_option("--max-boxes", f.max_boxes, "Box budget (default 1024)"));
  pv->add_flag("--json", f.json, "Accepted for symmetry; output is always JSON");

  auto* bn = app.add_subcommand("bench", "Run a subjects x methods x budgets x repetitions grid; CSV out");
  add_common_flags(bn, f);
  add_method_flags(bn, f);
  f.add("subjects", bn->add_option("--subjects", f.subjects, "Builtin subject names"));
  bn->add_option("--suite", f.suites, "Subject suites: sphere, torus, relu");
  f.add("methods", bn->add_option("--methods", f.methods, "Methods (default: all four)"));
  f.add("budgets", bn->add_option("--budgets", f.budgets, "Budgets (default: --budget)"));
  f.add("repetitions", bn->add_option("--repetitions", f.repetitions, "Repetitions per cell"));
  bn->add_flag("--timing", f.timing, "Fill the wall_ms column (makes output run-dependent)");

  auto* mt = app.add_subcommand("make-truth", "Regenerate brute-force ground truths in the fixture file");
  add_common_flags(mt, f);
  f.add("subjects", mt->add_option("--subjects", f.subjects, "Subjects (default: torus torus-correlated relu)"));
  mt->add_option("--samples", f.truth_samples, "Samples per oracle run");
  mt->add_option("--fixtures", f.fixtures, "Fixture directory (default: PAISC_FIXTURES or the source tree)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (est->parsed()) return cmd_estimate(f);
    if (pv->parsed()) return cmd_pave(f);
    if (bn->parsed()) return cmd_bench(f);
    if (mt->parsed()) return cmd_make_truth(f);
  } catch (const ParseError& e) {
    std::cerr << "paisc: parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::cerr << "paisc: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SeedingError& e) {
    std::cerr << "paisc: " << e.what() << '\n';
    return kExitSeeding;
  } catch (const NotApplicableError& e) {
    std::cerr << "paisc: " << e.what() << '\n';
    return kExitNotApplicable;
  } catch (const std::exception& e) {
    std::cerr << "paisc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
