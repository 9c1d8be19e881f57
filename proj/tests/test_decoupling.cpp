#include "padec/decoupling.hpp"

#include <gtest/gtest.h>

using namespace padec::decoupling;
using padec::cplx;
using padec::model::kInfinity;
using padec::model::ModelParams;
using padec::model::SpectralCoeffs;
using padec::geometry::Interval;

namespace {

BilinearConfig desk_config(int L = 4, int M = 2) {
  return BilinearConfig::make(ModelParams::make(3, L, M), 1, 1, 1, Interval::make(3, 1, 1), Interval::make(3, 1, 0));
}

// 2 Re sum conj(h) grad against a central difference of F along h.
template <class F>
void check_gradient(F f, const SpectralCoeffs& g, const SpectralCoeffs& grad, std::mt19937_64& rng) {
  auto h = padec::model::random_spectrum(g.params, rng);
  const double eps = 1e-5;
  SpectralCoeffs gp = g, gm = g;
  for (std::size_t k = 0; k < g.data.size(); ++k) {
    gp.data[k] += eps * h.data[k];
    gm.data[k] -= eps * h.data[k];
  }
  const double fd = (f(gp) - f(gm)) / (2 * eps);
  double an = 0;
  for (std::size_t k = 0; k < g.data.size(); ++k) an += 2 * (std::conj(h.data[k]) * grad.data[k]).real();
  EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(fd)));
}

}  // namespace

TEST(Decoupling, PlancherelRatioIsOne) {
  auto p = ModelParams::make(3, 2, 1);
  auto est = ascent_estimate(p, 2, 3, 20);
  EXPECT_NEAR(est.value, 1.0, 1e-9);
  std::mt19937_64 rng(1);
  EXPECT_NEAR(decoupling_ratio(padec::model::random_spectrum(ModelParams::make(5, 4, 2), rng), 2, 2).value, 1.0, 1e-12);
}

TEST(Decoupling, SupNormRatioBoundedByRootCount) {
  auto p = ModelParams::make(3, 2, 1);
  auto est = ascent_estimate(p, kInfinity, 4, 30);
  EXPECT_LE(est.value, std::sqrt(3.0) + 1e-9);
  EXPECT_NEAR(lower_bound_examples(p, kInfinity).value, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(est.recompute(), est.value, 1e-9);
}

TEST(Decoupling, ExamplesAtCriticalAndSupercritical) {
  auto thin2 = ModelParams::make(3, 2, 1);
  EXPECT_NEAR(decoupling_ratio(single_arc_example(thin2), 6, 1).value, 1.0, 1e-12);
  EXPECT_NEAR(decoupling_ratio(single_arc_example(thin2), 2, 1).value, 1.0, 1e-12);
  EXPECT_NEAR(decoupling_ratio(spread_example(thin2), 2, 1).value, 1.0, 1e-12);
  auto thin4 = ModelParams::make(3, 4, 2);
  auto ex = lower_bound_examples(thin4, 10);
  EXPECT_GE(ex.value, std::pow(9.0, 0.2) - 1e-6);
  EXPECT_NEAR(ex.recompute(), ex.value, 1e-9);
}

TEST(Decoupling, AscentNeverBelowExamples) {
  auto p = ModelParams::make(3, 2, 1);
  for (double e : {4.0, 6.0, 10.0}) {
    auto ex = lower_bound_examples(p, e);
    auto est = ascent_estimate(p, e, 3, 25, 9);
    EXPECT_GE(est.value, ex.value - 1e-12);
    EXPECT_NEAR(est.recompute(), est.value, 1e-9);
  }
}

TEST(Decoupling, GradientMatchesFiniteDifference) {
  std::mt19937_64 rng(21);
  auto p = ModelParams::make(3, 4, 2);
  auto g = padec::model::random_spectrum(p, rng);
  for (double e : {4.0, 6.0}) {
    auto F = [&](const SpectralCoeffs& x) { return std::log(decoupling_ratio(x, e, 2).value); };
    check_gradient(F, g, log_ratio_gradient(g, e, 2), rng);
  }
  auto cfg = desk_config();
  auto gb = random_bilinear_spectrum(cfg, rng);
  auto B = [&](const SpectralCoeffs& x) { return 6 * std::log(bilinear_ratio(cfg, x).value); };
  check_gradient(B, gb, bilinear_gradient(cfg, gb), rng);
}

TEST(Decoupling, ProjectionContraction) {
  for (double e : {2.0, 4.0, 6.0, kInfinity}) {
    auto r = verify_projection_contraction(ModelParams::make(3, 4, 2), e, 20, 3);
    EXPECT_EQ(r.violations, 0) << e;
    EXPECT_LE(r.max_ratio, 1 + 1e-10);
  }
  auto p = ModelParams::make(3, 2, 1);
  auto g = single_arc_example(p);
  auto f = padec::model::synthesize(g);
  EXPECT_NEAR(padec::model::lp_norm(arc_field(g, Interval::make(3, 1, 0)), 6), padec::model::lp_norm(f, 6), 1e-12);
}

TEST(Bilinear, ConfigValidation) {
  auto p = ModelParams::make(3, 4, 2);
  EXPECT_THROW(BilinearConfig::make(p, 1, 1, 1, Interval::make(3, 1, 0), Interval::make(3, 1, 0)), padec::InvalidConfig);
  EXPECT_THROW(BilinearConfig::make(p, 1, 1, 1, Interval::make(3, 2, 1), Interval::make(3, 1, 0)), padec::InvalidConfig);
  EXPECT_THROW(BilinearConfig::make(p, 1, 1, 3, Interval::make(3, 1, 1), Interval::make(3, 3, 0)), padec::InvalidConfig);
  // separation below q nu
  EXPECT_THROW(BilinearConfig::make(p, 1, 2, 2, Interval::make(3, 2, 1), Interval::make(3, 2, 4)), padec::InvalidConfig);
  EXPECT_NO_THROW(desk_config());
}

TEST(Bilinear, TwoCharacterClosedForm) {
  auto cfg = desk_config();
  SpectralCoeffs g(cfg.model);
  g.at(1, 0) = cplx(0.3, -1.2);
  g.at(3, 0) = cplx(2.0, 0.5);
  EXPECT_NEAR(bilinear_ratio(cfg, g).value, 1.0, 1e-12);
  SpectralCoeffs only_ip(cfg.model);
  only_ip.at(0, 0) = 1;
  EXPECT_EQ(bilinear_ratio(cfg, only_ip).value, 0.0);
}

TEST(Bilinear, AscentBelowTrivialBound) {
  auto cfg = desk_config();
  auto est = bilinear_ascent(cfg, 3, 25, 4);
  EXPECT_GE(est.value, 1.0 - 1e-9);
  EXPECT_LE(est.value, std::sqrt(3.0) + 1e-9);
  EXPECT_NEAR(bilinear_ratio(cfg, est.witness).value, est.value, 1e-9);
}

TEST(Bilinear, RescalingPreservesRatio) {
  auto p = ModelParams::make(3, 4, 2);
  auto cfg = BilinearConfig::make(p, 1, 1, 1, Interval::make(3, 1, 1), Interval::make(3, 1, 2));
  std::mt19937_64 rng(2);
  auto g = padec::model::random_spectrum(p, rng);
  auto [moved, g2] = rescale_to_origin(cfg, g);
  EXPECT_EQ(moved.Iprime.residue, 0);
  EXPECT_EQ(moved.I.residue, 2);
  EXPECT_NEAR(bilinear_ratio(cfg, g).value, bilinear_ratio(moved, g2).value, 1e-10);
}

TEST(Keystep, OrthogonalityOnDeskConfig) {
  auto r = verify_keystep_orthogonality(desk_config(), 20, 1);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
  EXPECT_EQ(r.details["near_multiplicity"], 1);
  EXPECT_LE(r.details["max_far_cross_over_diagonal"].get<double>(), 1e-12);
}

TEST(Keystep, OrthogonalityWithNearPairs) {
  // nu = 1/9: near pairs exist, multiplicity q.
  auto cfg = BilinearConfig::make(ModelParams::make(3, 4, 2), 2, 1, 1, Interval::make(3, 2, 1), Interval::make(3, 2, 0));
  EXPECT_THROW(verify_keystep_orthogonality(cfg, 2), padec::InvalidConfig);
  auto cfg6 = BilinearConfig::make(ModelParams::make(3, 6, 3), 1, 1, 1, Interval::make(3, 1, 2), Interval::make(3, 1, 0));
  auto r = verify_keystep_orthogonality(cfg6, 3, 2);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
}

TEST(Keystep, StripsDisjoint) {
  auto r = verify_strip_disjointness(desk_config(), 10, 5);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
  EXPECT_TRUE(r.details["exact_containment"].get<bool>());
  // Arcs next to the origin square into the same strip.
  auto s3 = padec::geometry::strip_region(3, 3, 2, {4, 4});
  auto s6 = padec::geometry::strip_region(3, 6, 2, {4, 4});
  EXPECT_EQ(s3, s6);
}

TEST(Keystep, FixedXAndSubinterval) {
  auto r = verify_fixed_x_orthogonality(desk_config(), 10, 6);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
  EXPECT_NEAR(r.empirical_constant, 1.0, 1e-9);
  auto s = verify_subinterval_l2(desk_config(), 10, 7);
  EXPECT_TRUE(s.passed) << s.to_json().dump();
  auto cfg12 = BilinearConfig::make(ModelParams::make(3, 4, 2), 1, 1, 2, Interval::make(3, 1, 2), Interval::make(3, 2, 0));
  auto s12 = verify_subinterval_l2(cfg12, 10, 8);
  EXPECT_TRUE(s12.passed) << s12.to_json().dump();
  EXPECT_NEAR(s12.empirical_constant, 1.0, 1e-9);
}

TEST(Keystep, BallInflation) {
  auto r = verify_ball_inflation(desk_config(), 10, 3);
  EXPECT_TRUE(r.passed) << r.to_json().dump();
  EXPECT_DOUBLE_EQ(r.details["predicted_constant"].get<double>(), 1.0);
  // Single wavepackets: C = |T cap T'| |B| / (|T| |T'|) = 9 * 81 / 729.
  auto cfg = desk_config(4, 1);
  SpectralCoeffs g(cfg.model);
  for (std::int64_t c = 0; c < 81; ++c)
    if (cfg.I.contains(c) || cfg.Iprime.contains(c))
      for (std::int64_t e = 0; e < cfg.model.thickness(); ++e) g.at(c, e) = 1;
  EXPECT_NEAR(ball_inflation_constant(cfg, g), 9.0 * 81 / 729, 1e-9);
}
