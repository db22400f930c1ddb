#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "paisc/constraint.hpp"
#include "paisc/interval.hpp"

namespace paisc {

// Forward-backward (HC4-revise) contraction of `box` with respect to every
// atom, repeated until a sweep shrinks the box by less than 1% of its
// normalized width.  Never removes a solution of `c`.  Returns nullopt when
// the box provably holds no solution.
std::optional<Box> hc4_contract(const Constraint& c, const Box& box);

// Contracted domain: an enclosure of every solution.
std::optional<Box> bounding_box(const Constraint& c);

struct Paving {
  std::vector<Box> inner;  // contain only solutions
  std::vector<Box> outer;  // may contain solutions and non-solutions
  double accuracy = 0.0;
  // True when every undecided box was refined down to `accuracy` before the
  // box budget ran out.  Either way inner and outer together enclose all
  // solutions in the domain: undecided boxes left over at budget exhaustion
  // are emitted as outer boxes.
  bool exhausted = false;
};

// Branch and prune over the domain of `c`.  Boxes are processed first-in
// first-out; an undecided box whose max width normalized by the domain is
// not yet below `accuracy` is bisected along its widest normalized dimension while the
// total number of boxes stays within `max_boxes`.
Paving pave(const Constraint& c, double accuracy, std::size_t max_boxes);

// Depth-first branch and contract collecting up to `max_solutions` boxes that
// are inner, or undecided with normalized width <= accuracy and a center
// satisfying `c`.  Does not try to enclose every solution.  `max_nodes`
// bounds the number of boxes examined.
std::vector<Box> dfs_feasible_boxes(const Constraint& c, double accuracy, std::size_t max_solutions,
                                    std::size_t max_nodes = 200000);

// Inner/outer verdict for a box, from interval evaluation of each atom.
enum class BoxClass { Inner, Outer, Infeasible };
BoxClass classify(const Constraint& c, const Box& box);

}  // namespace paisc
