#include <gtest/gtest.h>

#include "paisc/constraint.hpp"
#include "paisc/interval.hpp"

using namespace paisc;

namespace {

Box box(std::vector<Interval> s) { return Box(std::move(s)); }

}  // namespace

TEST(Interval, SquareOfSymmetricRange) {
  const Expr x = Expr::variable(0);
  const Interval r = pow(x, 2).eval(box({{-5, 5}}));
  EXPECT_EQ(r, Interval(0, 25));
}

TEST(Interval, DependencyPessimismStaysSound) {
  const Expr x = Expr::variable(0);
  EXPECT_EQ((x - x).eval(box({{0, 1}})), Interval(-1, 1));
}

TEST(Interval, TorusOnDegenerateBox) {
  const Constraint c = parse_constraint("(sqrt(x^2 + y^2) - 3)^2 + z^2 <= 1", "x -5 5\ny -5 5\nz -5 5");
  const Interval r = c.atoms()[0].lhs().eval(box({{3, 3}, {0, 0}, {0, 0}}));
  EXPECT_EQ(r, Interval(0, 0));
}

TEST(Interval, DivisionByZeroStraddlingIsEntire) {
  EXPECT_EQ(Interval(1, 2) / Interval(-1, 1), Interval::entire());
  EXPECT_EQ(Interval(1, 2) / Interval(2, 4), Interval(0.25, 1));
  EXPECT_TRUE((Interval::empty() / Interval(-1, 1)).is_empty());
}

TEST(Interval, SqrtClipsNegativePart) {
  EXPECT_EQ(sqrt(Interval(-4, 9)), Interval(0, 3));
  EXPECT_TRUE(sqrt(Interval(-4, -1)).is_empty());
}

TEST(Interval, Arithmetic) {
  EXPECT_EQ(Interval(1, 2) + Interval(-3, 4), Interval(-2, 6));
  EXPECT_EQ(Interval(1, 2) - Interval(-3, 4), Interval(-3, 5));
  EXPECT_EQ(Interval(-1, 2) * Interval(-3, 4), Interval(-6, 8));
  EXPECT_EQ(-Interval(1, 2), Interval(-2, -1));
  EXPECT_EQ(pow(Interval(-2, 1), 3), Interval(-8, 1));
  EXPECT_EQ(pow(Interval(-2, 1), 0), Interval(1, 1));
  EXPECT_EQ(pow(Interval(2, 3), 2), Interval(4, 9));
}

TEST(Interval, EmptyAndHull) {
  EXPECT_TRUE(Interval(2, 1).is_empty());
  EXPECT_TRUE(intersect(Interval(0, 1), Interval(2, 3)).is_empty());
  EXPECT_EQ(hull(Interval(0, 1), Interval(2, 3)), Interval(0, 3));
  EXPECT_EQ(hull(Interval::empty(), Interval(2, 3)), Interval(2, 3));
  const Interval i = inflate(Interval(1, 1));
  EXPECT_LT(i.lo(), 1.0);
  EXPECT_GT(i.hi(), 1.0);
}

TEST(Box, BisectAndVolume) {
  const Box b = box({{0, 4}, {-1, 1}});
  EXPECT_DOUBLE_EQ(b.volume(), 8.0);
  auto [l, r] = b.bisect(0);
  EXPECT_EQ(l[0], Interval(0, 2));
  EXPECT_EQ(r[0], Interval(2, 4));
  EXPECT_EQ(l[1], b[1]);
  EXPECT_EQ(b.center(), (std::vector<double>{2, 0}));

  const Box ref = box({{0, 4}, {-10, 10}});
  EXPECT_EQ(b.widest_normalized_dim(ref), 0u);
  EXPECT_DOUBLE_EQ(b.max_normalized_width(ref), 1.0);
  const std::vector<double> in{1, 0}, out{5, 0};
  EXPECT_TRUE(b.contains(in));
  EXPECT_FALSE(b.contains(out));
}
