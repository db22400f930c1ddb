#include "paisc/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "paisc/constraint.hpp"
#include "paisc/error.hpp"

namespace paisc {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || *end != '\0') throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, _] : section)
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
}

void apply_method(const pt::ptree& s, ExperimentConfig& c) {
  check_keys(s, "method",
             {"name", "n_chains", "samples_per_proposal", "iterations", "warmup", "rwmh_scale",
              "proposal_cov_factor", "hmc_steps", "hmc_step_size", "kernel", "seed_strategy",
              "seed_accuracy", "seed_max_boxes", "adapt_window", "paving_accuracy", "paving_max_boxes"});
  PimaisConfig& p = c.pimais;
  for (const auto& [key, node] : s) {
    const std::string v = node.data();
    const std::string k = "method." + key;
    if (key == "name") c.method = trim(v);
    else if (key == "n_chains") p.n_chains = to_count(k, v);
    else if (key == "samples_per_proposal") p.samples_per_proposal = to_count(k, v);
    else if (key == "iterations") p.iterations = to_count(k, v);
    else if (key == "warmup") p.warmup = to_count(k, v);
    else if (key == "rwmh_scale") p.rwmh_scale = to_double(k, v);
    else if (key == "proposal_cov_factor") p.proposal_cov_factor = to_double(k, v);
    else if (key == "hmc_steps") p.hmc_steps = to_count(k, v);
    else if (key == "hmc_step_size") p.hmc_step_size = to_double(k, v);
    else if (key == "kernel") c.kernel = parse_kernel(trim(v));
    else if (key == "seed_strategy") p.seed_strategy = parse_seed_strategy(trim(v));
    else if (key == "seed_accuracy") p.seed_accuracy = to_double(k, v);
    else if (key == "seed_max_boxes") p.seed_max_boxes = to_count(k, v);
    else if (key == "adapt_window") p.adapt_window = to_count(k, v);
    else if (key == "paving_accuracy") c.paving_accuracy = to_double(k, v);
    else if (key == "paving_max_boxes") c.paving_max_boxes = to_count(k, v);
  }
}

void apply_run(const pt::ptree& s, ExperimentConfig& c) {
  check_keys(s, "run", {"budget", "repetitions", "seed", "threads", "out", "format"});
  for (const auto& [key, node] : s) {
    const std::string v = node.data();
    const std::string k = "run." + key;
    if (key == "budget") c.budget = to_count(k, v);
    else if (key == "repetitions") c.repetitions = to_count(k, v);
    else if (key == "seed") c.seed = to_count(k, v);
    else if (key == "threads") c.threads = static_cast<unsigned>(to_count(k, v));
    else if (key == "out") c.out = trim(v);
    else if (key == "format") c.format = trim(v);
  }
  if (c.format != "text" && c.format != "json" && c.format != "csv")
    throw ConfigError("run.format must be text, json or csv");
}

void apply_bench(const pt::ptree& s, ExperimentConfig& c) {
  check_keys(s, "bench", {"subjects", "methods", "budgets", "timing"});
  for (const auto& [key, node] : s) {
    const std::string v = node.data();
    if (key == "subjects") c.bench_subjects = split_list(v);
    else if (key == "methods") c.bench_methods = split_list(v);
    else if (key == "timing") c.timing = to_bool("bench.timing", v);
    else if (key == "budgets") {
      c.bench_budgets.clear();
      for (const auto& b : split_list(v)) c.bench_budgets.push_back(to_count("bench.budgets", b));
    }
  }
}

std::vector<std::string> split_args(const std::string& inner) {
  std::vector<std::string> args;
  std::string cur;
  for (char ch : inner) {
    if (ch == ',') {
      args.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  args.push_back(trim(cur));
  return args;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  for (const auto& [name, section] : tree) {
    if (!section.data().empty()) throw ConfigError("config: key '" + name + "' outside a section");
    if (name == "problem") {
      check_keys(section, name, {"subject", "constraint", "domain_file"});
      c.subject = trim(section.get<std::string>("subject", ""));
      c.constraint = trim(section.get<std::string>("constraint", ""));
      if (auto f = section.get_optional<std::string>("domain_file")) {
        std::filesystem::path p = trim(*f);
        if (p.is_relative()) p = base_dir / p;
        c.domain += read_file(p);
      }
    } else if (name == "domain") {
      for (const auto& [var, node] : section) c.domain += var + " " + node.data() + "\n";
    } else if (name == "distribution") {
      for (const auto& [var, node] : section) c.distribution.emplace_back(var, trim(node.data()));
    } else if (name == "mvnormal") {
      check_keys(section, name, {"mean", "cov"});
      c.mvnormal = std::make_pair(section.get<std::string>("mean", ""), section.get<std::string>("cov", ""));
    } else if (name == "method") {
      apply_method(section, c);
    } else if (name == "run") {
      apply_run(section, c);
    } else if (name == "bench") {
      apply_bench(section, c);
    } else {
      throw ConfigError("unknown config section [" + name + "]");
    }
  }
  c.pimais.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& file) {
  return parse_config(read_file(file), file.parent_path());
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "[problem]\n";
  if (!c.subject.empty()) os << "subject = " << c.subject << '\n';
  if (!c.constraint.empty()) os << "constraint = " << c.constraint << '\n';
  if (!c.domain.empty()) {
    os << "\n[domain]\n";
    const DomainDecl d = parse_domain(c.domain);
    for (std::size_t i = 0; i < d.names.size(); ++i)
      os << d.names[i] << " = " << fmt(d.box[i].lo()) << ' ' << fmt(d.box[i].hi()) << '\n';
  }
  if (!c.distribution.empty()) {
    os << "\n[distribution]\n";
    for (const auto& [var, spec] : c.distribution) os << var << " = " << spec << '\n';
  }
  if (c.mvnormal) os << "\n[mvnormal]\nmean = " << c.mvnormal->first << "\ncov = " << c.mvnormal->second << '\n';

  const PimaisConfig& p = c.pimais;
  os << "\n[method]\n"
     << "name = " << c.method << '\n'
     << "n_chains = " << p.n_chains << '\n'
     << "samples_per_proposal = " << p.samples_per_proposal << '\n'
     << "iterations = " << p.iterations << '\n'
     << "warmup = " << p.warmup << '\n'
     << "rwmh_scale = " << fmt(p.rwmh_scale) << '\n'
     << "proposal_cov_factor = " << fmt(p.proposal_cov_factor) << '\n'
     << "hmc_steps = " << p.hmc_steps << '\n'
     << "hmc_step_size = " << fmt(p.hmc_step_size) << '\n';
  if (c.kernel) os << "kernel = " << to_string(*c.kernel) << '\n';
  os << "seed_strategy = " << to_string(p.seed_strategy) << '\n'
     << "seed_accuracy = " << fmt(p.seed_accuracy) << '\n'
     << "seed_max_boxes = " << p.seed_max_boxes << '\n'
     << "adapt_window = " << p.adapt_window << '\n'
     << "paving_accuracy = " << fmt(c.paving_accuracy) << '\n'
     << "paving_max_boxes = " << c.paving_max_boxes << '\n';

  os << "\n[run]\n"
     << "budget = " << c.budget << '\n'
     << "repetitions = " << c.repetitions << '\n'
     << "seed = " << c.seed << '\n'
     << "threads = " << c.threads << '\n';
  if (!c.out.empty()) os << "out = " << c.out << '\n';
  os << "format = " << c.format << '\n';

  os << "\n[bench]\n";
  auto join = [&](const auto& xs) {
    std::string s;
    for (const auto& x : xs) {
      if (!s.empty()) s += ' ';
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) s += x;
      else s += std::to_string(x);
    }
    return s;
  };
  if (!c.bench_subjects.empty()) os << "subjects = " << join(c.bench_subjects) << '\n';
  if (!c.bench_methods.empty()) os << "methods = " << join(c.bench_methods) << '\n';
  if (!c.bench_budgets.empty()) os << "budgets = " << join(c.bench_budgets) << '\n';
  os << "timing = " << (c.timing ? "true" : "false") << '\n';
  return os.str();
}

Factor parse_factor(const std::string& text, const std::vector<std::string>& vars) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')')
    throw ConfigError("distribution '" + text + "': expected family(args)");
  const std::string family = trim(t.substr(0, open));
  const auto args = split_args(t.substr(open + 1, t.size() - open - 2));

  Factor f;
  auto number = [&](std::size_t i) { return to_double("distribution '" + text + "'", args[i]); };
  auto location = [&](std::size_t i) {
    const auto it = std::find(vars.begin(), vars.end(), args[i]);
    if (it == vars.end()) return number(i);
    f.parent = static_cast<int>(it - vars.begin());
    return 0.0;
  };
  auto arity = [&](std::size_t n) {
    if (args.size() != n)
      throw ConfigError("distribution '" + text + "': " + family + " takes " + std::to_string(n) + " arguments");
  };

  if (family == "normal") {
    arity(2);
    f.dist = Gaussian{location(0), number(1)};
  } else if (family == "student_t") {
    arity(3);
    f.dist = StudentT{number(0), location(1), number(2)};
  } else if (family == "uniform") {
    arity(2);
    f.dist = Uniform{number(0), number(1)};
  } else if (family == "truncnormal") {
    arity(4);
    f.dist = TruncatedGaussian{location(0), number(1), number(2), number(3)};
  } else {
    throw ConfigError("unknown distribution family '" + family +
                      "' (expected normal, student_t, uniform or truncnormal)");
  }
  try {
    validate(f.dist);
  } catch (const Error& e) {
    throw ConfigError("distribution '" + text + "': " + e.what());
  }
  return f;
}

Distribution make_distribution(const ExperimentConfig& cfg, const std::vector<std::string>& vars) {
  if (cfg.mvnormal) {
    if (!cfg.distribution.empty()) throw ConfigError("give either [distribution] or [mvnormal], not both");
    const auto n = static_cast<Eigen::Index>(vars.size());
    std::vector<double> mean;
    for (const auto& s : split_list(cfg.mvnormal->first)) mean.push_back(to_double("mvnormal.mean", s));
    if (mean.size() != vars.size()) throw ConfigError("mvnormal.mean needs one entry per variable");
    Eigen::MatrixXd cov(n, n);
    std::istringstream rows(cfg.mvnormal->second);
    std::string row;
    Eigen::Index r = 0;
    while (std::getline(rows, row, ',')) {
      std::istringstream cells(row);
      std::string cell;
      Eigen::Index col = 0;
      while (cells >> cell) {
        if (r >= n || col >= n) throw ConfigError("mvnormal.cov must be " + std::to_string(n) + "x" + std::to_string(n));
        cov(r, col++) = to_double("mvnormal.cov", cell);
      }
      if (col != n) throw ConfigError("mvnormal.cov must be " + std::to_string(n) + "x" + std::to_string(n));
      ++r;
    }
    if (r != n) throw ConfigError("mvnormal.cov must be " + std::to_string(n) + "x" + std::to_string(n));
    MultivariateGaussian g{Eigen::Map<Eigen::VectorXd>(mean.data(), n), cov};
    try {
      return Distribution(std::move(g));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(std::string("mvnormal: ") + e.what());
    }
  }

  std::map<std::string, std::string> by_var(cfg.distribution.begin(), cfg.distribution.end());
  if (by_var.size() != cfg.distribution.size()) throw ConfigError("a variable's distribution is given twice");
  std::vector<Factor> factors;
  bool chained = false;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto it = by_var.find(vars[i]);
    if (it == by_var.end()) throw ConfigError("no distribution given for variable '" + vars[i] + "'");
    Factor f = parse_factor(it->second, vars);
    if (f.parent >= static_cast<int>(i))
      throw ConfigError("'" + vars[i] + "' may only depend on a variable declared before it");
    chained = chained || f.parent >= 0;
    factors.push_back(std::move(f));
    by_var.erase(it);
  }
  if (!by_var.empty()) throw ConfigError("distribution given for undeclared variable '" + by_var.begin()->first + "'");
  if (chained) return Distribution(FactorizedChain{std::move(factors)});
  IndependentProduct prod;
  for (auto& f : factors) prod.components.push_back(f.dist);
  return Distribution(std::move(prod));
}

Constraint make_constraint(const ExperimentConfig& cfg) {
  if (!cfg.subject.empty()) {
    if (!cfg.constraint.empty()) throw ConfigError("give either a subject or a constraint, not both");
    return builtin_subject(cfg.subject).constraint;
  }
  if (cfg.constraint.empty()) throw ConfigError("no subject or constraint given");
  if (cfg.domain.empty()) throw ConfigError("constraint needs domain declarations");
  return parse_constraint(cfg.constraint, cfg.domain);
}

Subject make_subject(const ExperimentConfig& cfg) {
  if (!cfg.subject.empty()) {
    if (!cfg.constraint.empty() || !cfg.domain.empty() || !cfg.distribution.empty() || cfg.mvnormal)
      throw ConfigError("give either a builtin subject or a constraint with its domain and distribution, not both");
    Subject s = builtin_subject(cfg.subject);
    attach_truth(s, load_truths(fixture_dir()));
    return s;
  }
  Constraint c = make_constraint(cfg);
  const std::vector<std::string> vars(c.vars().begin(), c.vars().end());
  Distribution p = make_distribution(cfg, vars);
  return Subject{"custom", std::move(c), std::move(p), std::nullopt};
}

Method make_method(const ExperimentConfig& cfg, const std::string& name) {
  Method m = builtin_method(name);
  const Kernel kernel = cfg.kernel.value_or(m.pimais.kernel);
  m.pimais = cfg.pimais;
  m.pimais.kernel = kernel;
  m.paving_accuracy = cfg.paving_accuracy;
  m.paving_max_boxes = cfg.paving_max_boxes;
  return m;
}

}  // namespace paisc
