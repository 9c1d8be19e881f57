#include "padec/iteration.hpp"

#include <gtest/gtest.h>

using namespace padec;
using namespace padec::iteration;

TEST(Trivial, Bounds) {
  EXPECT_EQ(trivial_bounds(3, 2, 2), 1.0);
  EXPECT_NEAR(trivial_bounds(3, 2, std::numeric_limits<double>::infinity()), 3.0, 1e-12);
  EXPECT_EQ(trivial_exponent_exact(6), Rational(1, 3));
  EXPECT_EQ(trivial_exponent_exact(2), Rational(0));
  EXPECT_NEAR(trivial_bounds(3, 2, 6), std::pow(9.0, 1.0 / 3), 1e-12);
  EXPECT_THROW(trivial_bounds(3, 2, 1.5), InvalidConfig);
  // Interpolation exponent between the endpoints: theta = 2/p.
  for (int p : {3, 4, 6, 10}) {
    const Rational theta(2, p);
    EXPECT_EQ(trivial_exponent_exact(p), (1 - theta) * Rational(1, 2));
  }
}

TEST(Trivial, Mab) {
  const auto Dinf = trivial_dbound(3, std::numeric_limits<double>::infinity());
  EXPECT_NEAR(mab_trivial(1, 1, 2, 1, Dinf), std::sqrt(3.0), 1e-12);
  for (int e = 2; e <= 6; ++e) EXPECT_NEAR(mab_trivial(2, 2, e + 2, 1, Dinf), Dinf(e), 1e-12);
  // delta = nu^{2b}: the second factor sits at scale 1.
  EXPECT_NEAR(mab_trivial(2, 1, 2, 1, Dinf), std::pow(Dinf(1), 2.0 / 3), 1e-12);
  EXPECT_THROW(mab_trivial(3, 1, 2, 1, Dinf), InvalidConfig);
}

TEST(Chain, WeightsTelescope) {
  for (int N = 1; N <= 20; ++N) EXPECT_EQ(iter1_weights(N).sum(), Rational(1)) << N;
  const auto w = iter1_weights(1);
  EXPECT_EQ(w.chain.at(0), Rational(1, 2));
  EXPECT_EQ(w.first, Rational(1, 6));
  EXPECT_EQ(w.second, Rational(1, 3));
}

TEST(Chain, Values) {
  ConstantsLedger led{3, 1, 1, Rational(2)};
  for (int N = 1; N <= 4; ++N) {
    const auto v = iter_chain(N, led, unit_dbound(), 1 << N, 1);
    EXPECT_NEAR(v.bilinear, 9.0, 1e-12);
    EXPECT_NEAR(v.linear, 10.0, 1e-12);
  }
  const auto Dinf = trivial_dbound(3, std::numeric_limits<double>::infinity());
  const auto v = iter_chain(1, led, Dinf, 4, 1);
  const double expect = 9.0 * std::pow(Dinf(3), 0.5) * std::pow(Dinf(3), 1.0 / 6) * std::pow(Dinf(2), 1.0 / 3);
  EXPECT_NEAR(v.bilinear, expect, 1e-9);
  EXPECT_THROW(iter_chain(2, led, Dinf, 3, 1), InvalidConfig);
  EXPECT_EQ(ConstantsLedger::defaults(5).C1, 125.0);
  EXPECT_EQ(ConstantsLedger::defaults(5).C3, Rational(12));
}

TEST(Chain, Combinators) {
  EXPECT_EQ(bilinear_reduction_value(2.5, 0, 3, 1, 4, Rational(12)), 10.0);
  EXPECT_NEAR(bilinear_reduction_value(1, 1, 3, 1, 1, Rational(1)), 4.0, 1e-12);
  EXPECT_NEAR(climb_value(1.7, 1.7), 1.7, 1e-15);
  EXPECT_THROW(climb_value(-1, 1), InvalidConfig);
}

TEST(Driver, FirstStep) {
  const auto s = fixed_point_driver(1, Rational(1, 2), Rational(1, 1000));
  ASSERT_FALSE(s.trace.empty());
  EXPECT_EQ(s.trace[0].round, 1);
  EXPECT_EQ(s.trace[0].N, 5);
  EXPECT_EQ(*s.trace[0].lambda_exact, Rational(31, 64));
  EXPECT_EQ(s.csv().substr(0, 71), "round,N,lambda_exact,lambda_decimal,rounds_in_row\n1,5,31/64,0.484375,1\n");
  EXPECT_TRUE(s.terminated);
}

TEST(Driver, DepthIsMinimalAndLambdaDecreases) {
  const auto s = fixed_point_driver(1, Rational(1, 2), Rational(1, 1000));
  Rational prev = Rational(1, 2);
  for (auto& r : s.trace) {
    if (!r.lambda_exact) break;
    const Rational before = prev;
    EXPECT_EQ(r.N, minimal_depth(1, before));
    EXPECT_LT(*r.lambda_exact, before);
    EXPECT_TRUE(contradiction_step_holds(1, before, static_cast<int>(r.N)));
    prev = *r.lambda_exact;
  }
  double last = 1;
  BigInt round = 0, depth = 0;
  for (auto& r : s.trace) {
    const double v = std::stod(r.lambda_decimal);
    EXPECT_LE(v, last);
    EXPECT_GT(r.round, round);
    EXPECT_GE(r.N, depth);
    EXPECT_EQ(r.round - round, r.rounds_in_row);
    last = v;
    round = r.round;
    depth = r.N;
  }
  EXPECT_LT(std::stod(s.final_lambda), 1e-3 * (1 + 1e-12));
}

TEST(Driver, Reproducible) {
  const auto a = fixed_point_driver(1, Rational(1, 2), Rational(1, 1000)).csv();
  const auto b = fixed_point_driver(1, Rational(1, 2), Rational(1, 1000)).csv();
  EXPECT_EQ(a, b);
}

TEST(Driver, SmallC3Halves) {
  const auto s = fixed_point_driver(Rational(1, 1000), Rational(1, 2), Rational(1, 100));
  EXPECT_EQ(s.trace[0].N, 1);
  EXPECT_EQ(*s.trace[0].lambda_exact, Rational(1, 4));
  EXPECT_EQ(*s.trace[1].lambda_exact, Rational(1, 8));
}

TEST(Driver, LargeC3Regression) {
  const auto s = fixed_point_driver(10, Rational(1, 2), Rational(1, 100));
  EXPECT_TRUE(s.terminated);
  EXPECT_EQ(s.trace.size(), 1961u);
  EXPECT_EQ(s.trace.front().N, 41);
  EXPECT_EQ(s.total_rounds.str().size(), 600u);
}

TEST(Driver, Errors) {
  EXPECT_THROW(fixed_point_driver(1, 0, Rational(1, 10)), InvalidConfig);
  EXPECT_THROW(fixed_point_driver(1, Rational(3, 4), Rational(1, 10)), InvalidConfig);
  EXPECT_THROW(fixed_point_driver(0, Rational(1, 2), Rational(1, 10)), InvalidConfig);
  const auto s = fixed_point_driver(1, Rational(1, 2), Rational(1, 1000), 3);
  EXPECT_FALSE(s.terminated);
  EXPECT_EQ(s.stop_reason, "round guard reached");
  EXPECT_EQ(s.total_rounds, 3);
}

TEST(Driver, ContradictionStep) {
  for (int num = 1; num <= 50; ++num) {
    const Rational lam(num, 100);
    for (Rational c3 : {Rational(1, 7), Rational(1), Rational(12)}) {
      const BigInt n = minimal_depth(c3, lam);
      if (n > 60) continue;
      EXPECT_TRUE(contradiction_step_holds(c3, lam, static_cast<int>(n)));
      if (n > 1) {
        const Rational gain = Rational(5, 6) + Rational(static_cast<int>(n) - 1, 2) - c3 / lam;
        EXPECT_LT(gain, 1);
      }
    }
  }
}

TEST(Parse, Rationals) {
  EXPECT_EQ(parse_rational("1/2"), Rational(1, 2));
  EXPECT_EQ(parse_rational("0.001"), Rational(1, 1000));
  EXPECT_EQ(parse_rational("12"), Rational(12));
  EXPECT_THROW(parse_rational("abc"), InvalidConfig);
  EXPECT_THROW(parse_rational("1/0"), InvalidConfig);
}
