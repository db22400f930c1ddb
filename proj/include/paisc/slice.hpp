#pragma once

#include <string>
#include <vector>

#include "paisc/constraint.hpp"

namespace paisc {

struct Slice {
  // Sub-constraint over `variables` only (re-indexed; variable order follows
  // the parent constraint).
  Constraint constraint;
  // Indices of the slice's variables in the parent constraint.
  std::vector<int> variables;
};

// Groups atoms that (transitively) share a variable, with every pair of
// variables inside one correlation group treated as shared.  Variables that
// appear in no atom and in no correlation group with an atom variable are
// dropped: they do not affect satisfaction.
std::vector<Slice> slice_constraint(const Constraint& c,
                                    const std::vector<std::vector<std::string>>& correlation_groups = {});

// Restriction of a full point to a slice's variables.
std::vector<double> restrict_point(const Slice& s, std::span<const double> x);

}  // namespace paisc
