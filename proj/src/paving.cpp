#include "paisc/paving.hpp"

#include <cmath>
#include <deque>

namespace paisc {

namespace {

constexpr double kEps = 1e-12;
constexpr int kMaxSweeps = 100;
constexpr double kMinImprovement = 0.01;

bool narrow(Interval& target, Interval bound) {
  target = intersect(target, inflate(bound, kEps));
  return !target.is_empty();
}

// Inverse of y = x^k restricted to the current x range.
Interval pow_preimage(Interval y, Interval x, int k) {
  if (k == 0) return y.contains(1.0) ? x : Interval::empty();
  if (k % 2 == 1) {
    auto root = [k](double v) { return std::copysign(std::pow(std::abs(v), 1.0 / k), v); };
    return {root(y.lo()), root(y.hi())};
  }
  y = intersect(y, {0.0, Interval::kInf});
  if (y.is_empty()) return y;
  const double r = std::pow(y.hi(), 1.0 / k);
  const double l = std::pow(y.lo(), 1.0 / k);
  // x lies in [-r, -l] or [l, r]; keep the hull of what x can still reach.
  const Interval neg = intersect(x, inflate(Interval{-r, -l}, kEps));
  const Interval pos = intersect(x, inflate(Interval{l, r}, kEps));
  return hull(neg, pos);
}

// One forward-backward pass of an atom over `box`.  False if infeasible.
bool revise(const Atom& atom, Box& box, std::vector<Interval>& v) {
  const Expr& e = atom.residual();
  const auto nodes = e.nodes();
  e.eval_nodes(box, v);
  const std::size_t root = e.root();
  v[root] = intersect(v[root], atom.feasible_residual());
  if (v[root].is_empty()) return false;

  for (std::size_t idx = nodes.size(); idx-- > 0;) {
    const Node& n = nodes[idx];
    const Interval out = v[idx];
    if (out.is_empty()) return false;
    switch (n.op) {
      case Op::Const:
        if (!inflate(out, kEps).contains(n.value)) return false;
        break;
      case Op::Var:
        if (!narrow(box[n.index], out)) return false;
        break;
      case Op::Neg:
        if (!narrow(v[n.lhs], -out)) return false;
        break;
      case Op::Add:
        if (!narrow(v[n.lhs], out - v[n.rhs])) return false;
        if (!narrow(v[n.rhs], out - v[n.lhs])) return false;
        break;
      case Op::Sub:
        if (!narrow(v[n.lhs], out + v[n.rhs])) return false;
        if (!narrow(v[n.rhs], v[n.lhs] - out)) return false;
        break;
      case Op::Mul:
        if (same_subtree(nodes, n.lhs, n.rhs)) {
          const Interval pre = pow_preimage(out, intersect(v[n.lhs], v[n.rhs]), 2);
          if (!narrow(v[n.lhs], pre) || !narrow(v[n.rhs], pre)) return false;
          break;
        }
        if (!v[n.rhs].contains_zero() && !narrow(v[n.lhs], out / v[n.rhs])) return false;
        if (!v[n.lhs].contains_zero() && !narrow(v[n.rhs], out / v[n.lhs])) return false;
        break;
      case Op::Div:
        // a = out * b wherever b != 0.
        if (!narrow(v[n.lhs], out * v[n.rhs])) return false;
        if (!out.contains_zero() && !narrow(v[n.rhs], v[n.lhs] / out)) return false;
        break;
      case Op::Sqrt: {
        const Interval y = intersect(out, {0.0, Interval::kInf});
        if (y.is_empty()) return false;
        if (!narrow(v[n.lhs], {y.lo() * y.lo(), y.hi() * y.hi()})) return false;
        break;
      }
      case Op::Pow: {
        const Interval pre = pow_preimage(out, v[n.lhs], n.index);
        if (!narrow(v[n.lhs], pre)) return false;
        break;
      }
    }
  }
  return true;
}

bool all_finite_width(const Box& b) {
  for (const auto& s : b.sides())
    if (!std::isfinite(s.width())) return false;
  return true;
}

}  // namespace

std::optional<Box> hc4_contract(const Constraint& c, const Box& box) {
  Box current = box;
  if (current.is_empty()) return std::nullopt;
  std::vector<Interval> scratch;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Box before = current;
    for (const auto& atom : c.atoms())
      if (!revise(atom, current, scratch)) return std::nullopt;
    // Backward bounds are inflated, never let that grow the box.
    current = intersect(current, before);
    if (current.is_empty()) return std::nullopt;

    double improvement = 0.0;
    for (std::size_t i = 0; i < current.dim(); ++i) {
      const double w0 = before[i].width();
      if (w0 > 0.0 && std::isfinite(w0))
        improvement = std::max(improvement, (w0 - current[i].width()) / w0);
    }
    if (improvement < kMinImprovement || !all_finite_width(current)) break;
  }
  return current;
}

std::optional<Box> bounding_box(const Constraint& c) { return hc4_contract(c, c.domain()); }

BoxClass classify(const Constraint& c, const Box& box) {
  bool all_true = true;
  for (const auto& atom : c.atoms()) {
    switch (atom.classify(box)) {
      case Atom::Certainty::False: return BoxClass::Infeasible;
      case Atom::Certainty::Unknown: all_true = false; break;
      case Atom::Certainty::True: break;
    }
  }
  return all_true ? BoxClass::Inner : BoxClass::Outer;
}

Paving pave(const Constraint& c, double accuracy, std::size_t max_boxes) {
  Paving out;
  out.accuracy = accuracy;
  out.exhausted = true;
  const Box& domain = c.domain();

  std::deque<Box> frontier;
  frontier.push_back(domain);
  while (!frontier.empty()) {
    Box box = std::move(frontier.front());
    frontier.pop_front();
    auto contracted = hc4_contract(c, box);
    if (!contracted) continue;
    box = std::move(*contracted);

    switch (classify(c, box)) {
      case BoxClass::Infeasible: continue;
      case BoxClass::Inner: out.inner.push_back(std::move(box)); continue;
      case BoxClass::Outer: break;
    }
    if (box.max_normalized_width(domain) < accuracy) {
      out.outer.push_back(std::move(box));
      continue;
    }
    // Boxes held after a split: everything emitted, queued, plus two halves.
    const std::size_t total = out.inner.size() + out.outer.size() + frontier.size() + 2;
    if (total > max_boxes) {
      out.exhausted = false;
      out.outer.push_back(std::move(box));
      continue;
    }
    auto [left, right] = box.bisect(box.widest_normalized_dim(domain));
    frontier.push_back(std::move(left));
    frontier.push_back(std::move(right));
  }
  return out;
}

std::vector<Box> dfs_feasible_boxes(const Constraint& c, double accuracy, std::size_t max_solutions,
                                    std::size_t max_nodes) {
  std::vector<Box> found;
  const Box& domain = c.domain();
  std::vector<Box> stack{domain};
  std::size_t visited = 0;
  while (!stack.empty() && found.size() < max_solutions && visited < max_nodes) {
    Box box = std::move(stack.back());
    stack.pop_back();
    ++visited;
    auto contracted = hc4_contract(c, box);
    if (!contracted) continue;
    box = std::move(*contracted);
    const BoxClass cls = classify(c, box);
    if (cls == BoxClass::Infeasible) continue;
    if (cls == BoxClass::Inner) {
      found.push_back(std::move(box));
      continue;
    }
    if (box.max_normalized_width(domain) <= accuracy) {
      const auto center = box.center();
      if (c.satisfied(center)) found.push_back(std::move(box));
      continue;
    }
    auto [left, right] = box.bisect(box.widest_normalized_dim(domain));
    stack.push_back(std::move(right));
    stack.push_back(std::move(left));
  }
  return found;
}

}  // namespace paisc
