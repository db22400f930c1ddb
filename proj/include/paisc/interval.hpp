#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace paisc {

// Closed interval [lo, hi] over the extended reals.  The empty set is a
// distinguished value (lo = +inf, hi = -inf) and never compares equal to a
// non-empty interval.
class Interval {
 public:
  constexpr Interval() = default;
  constexpr Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo <= hi)) {  // also catches NaN bounds
      lo_ = kInf;
      hi_ = -kInf;
    }
  }
  static constexpr Interval point(double v) { return {v, v}; }
  static constexpr Interval empty() { return {kInf, -kInf}; }
  static constexpr Interval entire() { return {-kInf, kInf}; }

  constexpr double lo() const { return lo_; }
  constexpr double hi() const { return hi_; }
  constexpr bool is_empty() const { return lo_ > hi_; }
  double width() const { return is_empty() ? 0.0 : hi_ - lo_; }
  double mid() const;
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains_zero() const { return contains(0.0); }

  friend bool operator==(const Interval&, const Interval&) = default;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval intersect(Interval a, Interval b);
Interval hull(Interval a, Interval b);

Interval operator-(Interval a);
Interval operator+(Interval a, Interval b);
Interval operator-(Interval a, Interval b);
Interval operator*(Interval a, Interval b);
// Division by an interval containing zero returns the conservative hull
// (the entire line, or empty if the numerator is empty).
Interval operator/(Interval a, Interval b);
// sqrt of the part of `a` inside [0, inf); empty when `a` is entirely negative.
Interval sqrt(Interval a);
Interval pow(Interval a, int exponent);

// Widen by a relative+absolute epsilon.  Used on backward-propagated bounds in
// place of directed rounding.
Interval inflate(Interval a, double eps = 1e-12);

// Axis-aligned box, one interval per variable.
class Box {
 public:
  Box() = default;
  explicit Box(std::vector<Interval> sides) : sides_(std::move(sides)) {}

  std::size_t dim() const { return sides_.size(); }
  const Interval& operator[](std::size_t i) const { return sides_[i]; }
  Interval& operator[](std::size_t i) { return sides_[i]; }
  std::span<const Interval> sides() const { return sides_; }

  bool is_empty() const;
  bool contains(std::span<const double> x) const;
  std::vector<double> center() const;
  // Lebesgue measure; 0 when any side is degenerate.
  double volume() const;
  // Largest side width after dividing by the matching side of `reference`.
  double max_normalized_width(const Box& reference) const;
  std::size_t widest_normalized_dim(const Box& reference) const;
  std::pair<Box, Box> bisect(std::size_t dim) const;

  friend bool operator==(const Box&, const Box&) = default;

 private:
  std::vector<Interval> sides_;
};

Box intersect(const Box& a, const Box& b);

std::string to_string(const Interval& i);

}  // namespace paisc
