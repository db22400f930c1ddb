#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "paisc/interval.hpp"

namespace paisc {

enum class Op : std::uint8_t { Const, Var, Neg, Sqrt, Pow, Add, Sub, Mul, Div };

struct Node {
  Op op = Op::Const;
  std::int32_t lhs = -1;  // child node index
  std::int32_t rhs = -1;
  double value = 0.0;     // Const
  std::int32_t index = 0; // Var: variable index; Pow: exponent

  friend bool operator==(const Node&, const Node&) = default;
};

// True when the subtrees rooted at `a` and `b` are structurally identical, so
// that a product of them is a square.
bool same_subtree(std::span<const Node> nodes, std::int32_t a, std::int32_t b);

// Arithmetic expression stored as a node arena in postfix order: children
// always precede their parent and the root is the last node.  A forward pass
// over the arena evaluates the expression; a reverse pass visits parents
// before children.
class Expr {
 public:
  static Expr constant(double v);
  static Expr variable(int index);

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr sqrt(const Expr& a);
  friend Expr pow(const Expr& a, int exponent);

  std::span<const Node> nodes() const { return nodes_; }
  std::size_t root() const { return nodes_.size() - 1; }
  int max_variable_index() const;

  double eval(std::span<const double> x) const;
  Interval eval(const Box& box) const;
  // Fills `out` (resized to nodes().size()) with the enclosure of every node.
  void eval_nodes(const Box& box, std::vector<Interval>& out) const;

  friend bool operator==(const Expr&, const Expr&) = default;

 private:
  static Expr unary(Op op, const Expr& a, std::int32_t index = 0);
  static Expr binary(Op op, const Expr& a, const Expr& b);

  std::vector<Node> nodes_;
};

enum class Rel : std::uint8_t { Le, Lt, Ge, Gt, Eq };

// lhs rel rhs.
class Atom {
 public:
  Atom(Expr lhs, Rel rel, Expr rhs);

  const Expr& lhs() const { return lhs_; }
  const Expr& rhs() const { return rhs_; }
  Rel rel() const { return rel_; }
  // lhs - rhs; the atom holds iff residual rel 0.
  const Expr& residual() const { return residual_; }
  // Allowed range of the residual.
  Interval feasible_residual() const;

  // NaN on either side counts as a violation and bumps `nan_count`.
  bool holds(std::span<const double> x, std::atomic<std::uint64_t>* nan_count) const;

  enum class Certainty { True, False, Unknown };
  Certainty classify(const Box& box) const;

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.lhs_ == b.lhs_ && a.rel_ == b.rel_ && a.rhs_ == b.rhs_;
  }

 private:
  Expr lhs_;
  Rel rel_;
  Expr rhs_;
  Expr residual_;
};

// Conjunction of atoms over named, bounded real variables.  Immutable once
// built; copies share the NaN diagnostic counter.
class Constraint {
 public:
  Constraint(std::vector<Atom> atoms, std::vector<std::string> vars, Box domain);

  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const std::string> vars() const { return vars_; }
  std::size_t dim() const { return vars_.size(); }
  const Box& domain() const { return domain_; }
  int var_index(const std::string& name) const;

  // 1_C(x).  Boundary points of <=, >= and == are included.
  bool satisfied(std::span<const double> x) const;
  std::uint64_t nan_evaluations() const { return nan_count_->load(); }

  friend bool operator==(const Constraint& a, const Constraint& b) {
    return a.atoms_ == b.atoms_ && a.vars_ == b.vars_ && a.domain_ == b.domain_;
  }

 private:
  std::vector<Atom> atoms_;
  std::vector<std::string> vars_;
  Box domain_;
  std::shared_ptr<std::atomic<std::uint64_t>> nan_count_;
};

// Text form re-readable by parse_constraint.
std::string to_string(const Expr& e, std::span<const std::string> vars);
std::string to_string(Rel rel);
std::string to_string(const Constraint& c);
std::string domain_to_string(const Constraint& c);

// Grammar:
//   constraint := atom ("&&" atom)*
//   atom       := expr rel expr,  rel := "<=" | "<" | ">=" | ">" | "==" | "="
//   expr       := term (("+" | "-") term)*
//   term       := unary (("*" | "/") unary)*
//   unary      := "-" unary | power
//   power      := primary ("^" integer)?
//   primary    := number | name | "sqrt" "(" expr ")" | "(" expr ")"
// Domain declarations: one `name lo hi` per line; '#' starts a comment.
// Variable order follows the declarations.
Constraint parse_constraint(std::string_view text, std::string_view domain_decls);

struct DomainDecl {
  std::vector<std::string> names;
  Box box;
};
DomainDecl parse_domain(std::string_view domain_decls);

}  // namespace paisc
