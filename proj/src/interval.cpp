#include "paisc/interval.hpp"

#include <cassert>
#include <sstream>

namespace paisc {

namespace {

// 0 * inf is taken as 0 in interval products.
double mul_bound(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

}  // namespace

double Interval::mid() const {
  if (is_empty()) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(lo_) && std::isinf(hi_)) return 0.0;
  if (std::isinf(lo_)) return -std::numeric_limits<double>::max();
  if (std::isinf(hi_)) return std::numeric_limits<double>::max();
  return lo_ + 0.5 * (hi_ - lo_);
}

Interval intersect(Interval a, Interval b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  return {std::max(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

Interval hull(Interval a, Interval b) {
  if (a.is_empty()) return b;
  if (b.is_empty()) return a;
  return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

Interval operator-(Interval a) {
  if (a.is_empty()) return a;
  return {-a.hi(), -a.lo()};
}

Interval operator+(Interval a, Interval b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  double lo = a.lo() + b.lo();
  double hi = a.hi() + b.hi();
  // inf + -inf
  if (std::isnan(lo)) lo = -Interval::kInf;
  if (std::isnan(hi)) hi = Interval::kInf;
  return {lo, hi};
}

Interval operator-(Interval a, Interval b) { return a + (-b); }

Interval operator*(Interval a, Interval b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  const double p[] = {mul_bound(a.lo(), b.lo()), mul_bound(a.lo(), b.hi()),
                      mul_bound(a.hi(), b.lo()), mul_bound(a.hi(), b.hi())};
  return {*std::min_element(std::begin(p), std::end(p)),
          *std::max_element(std::begin(p), std::end(p))};
}

Interval operator/(Interval a, Interval b) {
  if (a.is_empty() || b.is_empty()) return Interval::empty();
  if (b.contains_zero()) {
    if (b.lo() == 0.0 && b.hi() == 0.0) return Interval::empty();
    return Interval::entire();
  }
  const Interval recip{1.0 / b.hi(), 1.0 / b.lo()};
  return a * recip;
}

Interval sqrt(Interval a) {
  a = intersect(a, {0.0, Interval::kInf});
  if (a.is_empty()) return a;
  return {std::sqrt(a.lo()), std::sqrt(a.hi())};
}

Interval pow(Interval a, int k) {
  assert(k >= 0);
  if (a.is_empty()) return a;
  if (k == 0) return Interval::point(1.0);
  if (k % 2 == 1) return {ipow(a.lo(), k), ipow(a.hi(), k)};
  if (a.lo() >= 0.0) return {ipow(a.lo(), k), ipow(a.hi(), k)};
  if (a.hi() <= 0.0) return {ipow(a.hi(), k), ipow(a.lo(), k)};
  return {0.0, std::max(ipow(a.lo(), k), ipow(a.hi(), k))};
}

Interval inflate(Interval a, double eps) {
  if (a.is_empty()) return a;
  return {a.lo() - eps * (1.0 + std::abs(a.lo())),
          a.hi() + eps * (1.0 + std::abs(a.hi()))};
}

bool Box::is_empty() const {
  return std::any_of(sides_.begin(), sides_.end(),
                     [](const Interval& i) { return i.is_empty(); });
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != sides_.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!sides_[i].contains(x[i])) return false;
  return true;
}

std::vector<double> Box::center() const {
  std::vector<double> c(sides_.size());
  for (std::size_t i = 0; i < sides_.size(); ++i) c[i] = sides_[i].mid();
  return c;
}

double Box::volume() const {
  double v = 1.0;
  for (const auto& s : sides_) v *= s.width();
  return v;
}

double Box::max_normalized_width(const Box& reference) const {
  double w = 0.0;
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    const double ref = reference[i].width();
    w = std::max(w, ref > 0.0 ? sides_[i].width() / ref : 0.0);
  }
  return w;
}

std::size_t Box::widest_normalized_dim(const Box& reference) const {
  std::size_t best = 0;
  double best_w = -1.0;
  for (std::size_t i = 0; i < sides_.size(); ++i) {
    const double ref = reference[i].width();
    const double w = ref > 0.0 ? sides_[i].width() / ref : 0.0;
    if (w > best_w) {
      best_w = w;
      best = i;
    }
  }
  return best;
}

std::pair<Box, Box> Box::bisect(std::size_t dim) const {
  Box left = *this;
  Box right = *this;
  const double m = sides_[dim].mid();
  left[dim] = {sides_[dim].lo(), m};
  right[dim] = {m, sides_[dim].hi()};
  return {std::move(left), std::move(right)};
}

Box intersect(const Box& a, const Box& b) {
  assert(a.dim() == b.dim());
  std::vector<Interval> sides(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) sides[i] = intersect(a[i], b[i]);
  return Box(std::move(sides));
}

std::string to_string(const Interval& i) {
  if (i.is_empty()) return "[empty]";
  std::ostringstream os;
  os.precision(17);
  os << '[' << i.lo() << ", " << i.hi() << ']';
  return os.str();
}

}  // namespace paisc
