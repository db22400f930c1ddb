#include "paisc/constraint.hpp"

#include <array>
#include <cassert>
#include <cmath>
#include <sstream>

#include "paisc/error.hpp"

namespace paisc {

Expr Expr::constant(double v) {
  Expr e;
  e.nodes_.push_back({Op::Const, -1, -1, v, 0});
  return e;
}

Expr Expr::variable(int index) {
  Expr e;
  e.nodes_.push_back({Op::Var, -1, -1, 0.0, index});
  return e;
}

Expr Expr::unary(Op op, const Expr& a, std::int32_t index) {
  Expr e = a;
  e.nodes_.push_back({op, static_cast<std::int32_t>(a.root()), -1, 0.0, index});
  return e;
}

Expr Expr::binary(Op op, const Expr& a, const Expr& b) {
  Expr e = a;
  const auto offset = static_cast<std::int32_t>(a.nodes_.size());
  e.nodes_.reserve(a.nodes_.size() + b.nodes_.size() + 1);
  for (Node n : b.nodes_) {
    if (n.lhs >= 0) n.lhs += offset;
    if (n.rhs >= 0) n.rhs += offset;
    e.nodes_.push_back(n);
  }
  e.nodes_.push_back({op, static_cast<std::int32_t>(a.root()),
                      static_cast<std::int32_t>(e.nodes_.size() - 1), 0.0, 0});
  return e;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary(Op::Add, a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary(Op::Sub, a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary(Op::Mul, a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary(Op::Div, a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Op::Neg, a); }
Expr sqrt(const Expr& a) { return Expr::unary(Op::Sqrt, a); }
Expr pow(const Expr& a, int exponent) {
  if (exponent < 0) throw ConfigError("pow exponent must be a non-negative integer");
  return Expr::unary(Op::Pow, a, exponent);
}

int Expr::max_variable_index() const {
  int m = -1;
  for (const auto& n : nodes_)
    if (n.op == Op::Var) m = std::max(m, static_cast<int>(n.index));
  return m;
}

namespace {

double power(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

Interval power(Interval x, int k) { return pow(x, k); }

template <typename T>
T apply(const Node& n, const T* v) {
  using std::sqrt;
  switch (n.op) {
    case Op::Neg: return -v[n.lhs];
    case Op::Sqrt: return sqrt(v[n.lhs]);
    case Op::Pow: return power(v[n.lhs], static_cast<int>(n.index));
    case Op::Add: return v[n.lhs] + v[n.rhs];
    case Op::Sub: return v[n.lhs] - v[n.rhs];
    case Op::Mul: return v[n.lhs] * v[n.rhs];
    case Op::Div: return v[n.lhs] / v[n.rhs];
    default: break;
  }
  assert(false);
  return T{};
}

}  // namespace

bool same_subtree(std::span<const Node> nodes, std::int32_t a, std::int32_t b) {
  if (a == b) return true;
  if (a < 0 || b < 0) return false;
  const Node& x = nodes[a];
  const Node& y = nodes[b];
  if (x.op != y.op || x.value != y.value || x.index != y.index) return false;
  return same_subtree(nodes, x.lhs, y.lhs) && same_subtree(nodes, x.rhs, y.rhs);
}

double Expr::eval(std::span<const double> x) const {
  constexpr std::size_t kStack = 64;
  std::array<double, kStack> stack_buf;
  std::vector<double> heap_buf;
  double* v = stack_buf.data();
  if (nodes_.size() > kStack) {
    heap_buf.resize(nodes_.size());
    v = heap_buf.data();
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const: v[i] = n.value; break;
      case Op::Var: v[i] = x[n.index]; break;
      default: v[i] = apply(n, v);
    }
  }
  return v[nodes_.size() - 1];
}

void Expr::eval_nodes(const Box& box, std::vector<Interval>& out) const {
  out.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.op) {
      case Op::Const: out[i] = Interval::point(n.value); break;
      case Op::Var: out[i] = box[n.index]; break;
      case Op::Mul:
        out[i] = same_subtree(nodes_, n.lhs, n.rhs) ? pow(out[n.lhs], 2) : out[n.lhs] * out[n.rhs];
        break;
      default: out[i] = apply(n, out.data());
    }
  }
}

Interval Expr::eval(const Box& box) const {
  std::vector<Interval> v;
  eval_nodes(box, v);
  return v.back();
}

Atom::Atom(Expr lhs, Rel rel, Expr rhs)
    : lhs_(std::move(lhs)), rel_(rel), rhs_(std::move(rhs)), residual_(lhs_ - rhs_) {}

Interval Atom::feasible_residual() const {
  constexpr double inf = Interval::kInf;
  switch (rel_) {
    case Rel::Le:
    case Rel::Lt: return {-inf, 0.0};
    case Rel::Ge:
    case Rel::Gt: return {0.0, inf};
    case Rel::Eq: return Interval::point(0.0);
  }
  return Interval::entire();
}

bool Atom::holds(std::span<const double> x, std::atomic<std::uint64_t>* nan_count) const {
  const double a = lhs_.eval(x);
  const double b = rhs_.eval(x);
  if (std::isnan(a) || std::isnan(b)) {
    if (nan_count) nan_count->fetch_add(1, std::memory_order_relaxed);
    return false;
  }
  switch (rel_) {
    case Rel::Le: return a <= b;
    case Rel::Lt: return a < b;
    case Rel::Ge: return a >= b;
    case Rel::Gt: return a > b;
    case Rel::Eq: return a == b;
  }
  return false;
}

Atom::Certainty Atom::classify(const Box& box) const {
  const Interval r = residual_.eval(box);
  if (r.is_empty()) return Certainty::False;
  switch (rel_) {
    case Rel::Le:
      if (r.hi() <= 0.0) return Certainty::True;
      if (r.lo() > 0.0) return Certainty::False;
      break;
    case Rel::Lt:
      if (r.hi() < 0.0) return Certainty::True;
      if (r.lo() >= 0.0) return Certainty::False;
      break;
    case Rel::Ge:
      if (r.lo() >= 0.0) return Certainty::True;
      if (r.hi() < 0.0) return Certainty::False;
      break;
    case Rel::Gt:
      if (r.lo() > 0.0) return Certainty::True;
      if (r.hi() <= 0.0) return Certainty::False;
      break;
    case Rel::Eq:
      // Never certainly true on a box of positive width.
      if (!r.contains_zero()) return Certainty::False;
      if (r.lo() == 0.0 && r.hi() == 0.0) return Certainty::True;
      break;
  }
  return Certainty::Unknown;
}

Constraint::Constraint(std::vector<Atom> atoms, std::vector<std::string> vars, Box domain)
    : atoms_(std::move(atoms)),
      vars_(std::move(vars)),
      domain_(std::move(domain)),
      nan_count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (atoms_.empty()) throw ConfigError("constraint has no atoms");
  if (domain_.dim() != vars_.size())
    throw ConfigError("domain dimension does not match variable count");
  for (std::size_t i = 0; i < domain_.dim(); ++i) {
    const Interval& s = domain_[i];
    if (s.is_empty() || !std::isfinite(s.lo()) || !std::isfinite(s.hi()))
      throw ConfigError("variable '" + vars_[i] + "' needs a bounded domain");
  }
  for (const auto& a : atoms_) {
    const int m = std::max(a.lhs().max_variable_index(), a.rhs().max_variable_index());
    if (m >= static_cast<int>(vars_.size()))
      throw ConfigError("atom references an undeclared variable");
  }
}

int Constraint::var_index(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i] == name) return static_cast<int>(i);
  return -1;
}

bool Constraint::satisfied(std::span<const double> x) const {
  assert(x.size() == vars_.size());
  for (const auto& a : atoms_)
    if (!a.holds(x, nan_count_.get())) return false;
  return true;
}

namespace {

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string print_node(std::span<const Node> nodes, std::size_t i,
                       std::span<const std::string> vars) {
  const Node& n = nodes[i];
  switch (n.op) {
    case Op::Const: return format_number(n.value);
    case Op::Var: return vars[n.index];
    case Op::Neg: return "(-" + print_node(nodes, n.lhs, vars) + ")";
    case Op::Sqrt: return "sqrt(" + print_node(nodes, n.lhs, vars) + ")";
    case Op::Pow:
      return "(" + print_node(nodes, n.lhs, vars) + "^" + std::to_string(n.index) + ")";
    default: break;
  }
  const char* sym = n.op == Op::Add ? " + " : n.op == Op::Sub ? " - " : n.op == Op::Mul ? " * " : " / ";
  return "(" + print_node(nodes, n.lhs, vars) + sym + print_node(nodes, n.rhs, vars) + ")";
}

}  // namespace

std::string to_string(const Expr& e, std::span<const std::string> vars) {
  return print_node(e.nodes(), e.root(), vars);
}

std::string to_string(Rel rel) {
  switch (rel) {
    case Rel::Le: return "<=";
    case Rel::Lt: return "<";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
    case Rel::Eq: return "==";
  }
  return "?";
}

std::string to_string(const Constraint& c) {
  std::string out;
  for (const auto& a : c.atoms()) {
    if (!out.empty()) out += " && ";
    out += to_string(a.lhs(), c.vars()) + " " + to_string(a.rel()) + " " +
           to_string(a.rhs(), c.vars());
  }
  return out;
}

std::string domain_to_string(const Constraint& c) {
  std::string out;
  for (std::size_t i = 0; i < c.dim(); ++i)
    out += c.vars()[i] + " " + format_number(c.domain()[i].lo()) + " " +
           format_number(c.domain()[i].hi()) + "\n";
  return out;
}

}  // namespace paisc
