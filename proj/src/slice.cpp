#include "paisc/slice.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "paisc/error.hpp"

namespace paisc {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<int> atom_variables(const Atom& a) {
  std::vector<int> vars;
  for (const Expr* e : {&a.lhs(), &a.rhs()})
    for (const auto& n : e->nodes())
      if (n.op == Op::Var) vars.push_back(n.index);
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
  return vars;
}

Expr remap(const Expr& e, const std::vector<int>& new_index) {
  // Rebuild through the public combinators so the arena stays canonical.
  std::vector<Expr> built;
  built.reserve(e.nodes().size());
  for (const auto& n : e.nodes()) {
    switch (n.op) {
      case Op::Const: built.push_back(Expr::constant(n.value)); break;
      case Op::Var: built.push_back(Expr::variable(new_index[n.index])); break;
      case Op::Neg: built.push_back(-built[n.lhs]); break;
      case Op::Sqrt: built.push_back(sqrt(built[n.lhs])); break;
      case Op::Pow: built.push_back(pow(built[n.lhs], n.index)); break;
      case Op::Add: built.push_back(built[n.lhs] + built[n.rhs]); break;
      case Op::Sub: built.push_back(built[n.lhs] - built[n.rhs]); break;
      case Op::Mul: built.push_back(built[n.lhs] * built[n.rhs]); break;
      case Op::Div: built.push_back(built[n.lhs] / built[n.rhs]); break;
    }
  }
  return built.back();
}

}  // namespace

std::vector<Slice> slice_constraint(const Constraint& c,
                                    const std::vector<std::vector<std::string>>& correlation_groups) {
  const std::size_t d = c.dim();
  DisjointSets sets(d);
  std::vector<bool> used(d, false);

  std::vector<std::vector<int>> per_atom;
  for (const auto& a : c.atoms()) {
    per_atom.push_back(atom_variables(a));
    const auto& vs = per_atom.back();
    for (int v : vs) used[v] = true;
    for (std::size_t i = 1; i < vs.size(); ++i) sets.unite(vs[0], vs[i]);
  }
  for (const auto& group : correlation_groups) {
    int first = -1;
    for (const auto& name : group) {
      const int idx = c.var_index(name);
      if (idx < 0) throw ConfigError("correlation group names unknown variable '" + name + "'");
      if (first < 0)
        first = idx;
      else
        sets.unite(first, idx);
    }
  }
  // A correlated partner of a used variable is part of that slice.
  for (std::size_t v = 0; v < d; ++v)
    if (used[v]) used[sets.find(v)] = true;
  for (std::size_t v = 0; v < d; ++v)
    if (used[sets.find(v)]) used[v] = true;

  // Groups ordered by their smallest variable index.
  std::map<std::size_t, Slice> groups;
  std::map<std::size_t, std::vector<std::size_t>> group_atoms;
  std::map<std::size_t, std::vector<int>> group_vars;
  for (std::size_t v = 0; v < d; ++v)
    if (used[v]) group_vars[sets.find(v)].push_back(static_cast<int>(v));
  for (std::size_t i = 0; i < per_atom.size(); ++i) {
    // Constant atoms (no variables) are attached to the first group.
    const std::size_t root = per_atom[i].empty()
                                 ? (group_vars.empty() ? 0 : group_vars.begin()->first)
                                 : sets.find(per_atom[i][0]);
    group_atoms[root].push_back(i);
  }

  std::vector<Slice> out;
  if (group_vars.empty()) {
    // Only variable-free atoms: a single slice over no variables is not
    // representable, keep the whole constraint.
    std::vector<int> all(d);
    std::iota(all.begin(), all.end(), 0);
    out.push_back({c, all});
    return out;
  }
  for (const auto& [root, vars] : group_vars) {
    std::vector<int> new_index(d, -1);
    std::vector<std::string> names;
    std::vector<Interval> sides;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      new_index[vars[k]] = static_cast<int>(k);
      names.push_back(c.vars()[vars[k]]);
      sides.push_back(c.domain()[vars[k]]);
    }
    std::vector<Atom> atoms;
    for (std::size_t ai : group_atoms[root]) {
      const Atom& a = c.atoms()[ai];
      atoms.emplace_back(remap(a.lhs(), new_index), a.rel(), remap(a.rhs(), new_index));
    }
    if (atoms.empty()) continue;  // correlated-only group with no atoms cannot happen
    out.push_back({Constraint(std::move(atoms), std::move(names), Box(std::move(sides))), vars});
  }
  return out;
}

std::vector<double> restrict_point(const Slice& s, std::span<const double> x) {
  std::vector<double> out(s.variables.size());
  for (std::size_t k = 0; k < s.variables.size(); ++k) out[k] = x[s.variables[k]];
  return out;
}

}  // namespace paisc
