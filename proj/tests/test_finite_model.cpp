#include "padec/finite_model.hpp"

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace padec::model;
using padec::cplx;
using padec::geometry::Interval;
using padec::geometry::partition_unit;

TEST(Model, ParamsValidated) {
  EXPECT_THROW(ModelParams::make(2, 2, 1), padec::InvalidConfig);
  EXPECT_THROW(ModelParams::make(3, 3, 1), padec::InvalidConfig);
  EXPECT_THROW(ModelParams::make(3, 4, 3), padec::InvalidConfig);
  EXPECT_THROW(ModelParams::make(3, 4, 0), padec::InvalidConfig);
  EXPECT_THROW(ModelParams::make(3, 10, 5), padec::ResourceLimit);
  EXPECT_EQ(ModelParams::thin(3, 4).M, 2);
}

TEST(Model, SynthesisMatchesDirectSum) {
  std::mt19937_64 rng(4);
  auto p = ModelParams::make(3, 2, 1);
  auto g = random_spectrum(p, rng);
  auto f = synthesize(g);
  const auto Q = p.side();
  for (std::int64_t n1 = 0; n1 < Q; ++n1)
    for (std::int64_t n2 = 0; n2 < Q; ++n2) {
      cplx acc = 0;
      for (std::int64_t c = 0; c < Q; ++c)
        for (std::int64_t e = 0; e < p.thickness(); ++e) {
          const auto d = (c * c + 9 * e) % Q;
          acc += g.at(c, e) * std::polar(1.0, 2 * std::numbers::pi * double((c * n1 + d * n2) % Q) / double(Q));
        }
      EXPECT_LT(std::abs(acc - f.at(n1, n2)), 1e-12);
    }
}

TEST(Model, RoundTripAndParseval) {
  std::mt19937_64 rng(7);
  for (int q : {3, 5})
    for (int L : {2, 4})
      for (int M = 1; 2 * M <= L; ++M) {
        auto p = ModelParams::make(q, L, M);
        for (int trial = 0; trial < 5; ++trial) {
          auto g = random_spectrum(p, rng);
          auto f = synthesize(g);
          auto back = analyze(f);
          double err = 0;
          for (std::size_t k = 0; k < g.data.size(); ++k) err = std::max(err, std::abs(back.data[k] - g.data[k]));
          EXPECT_LT(err, 1e-10);
          const double lhs = l2_sq(f.data), rhs = static_cast<double>(p.points()) * l2_sq(g.data);
          EXPECT_LT(std::abs(lhs - rhs) / rhs, 1e-10);
        }
      }
}

TEST(Model, AnalyzeRejectsOffParabolaEnergy) {
  auto p = ModelParams::make(3, 4, 2);
  PhysicalField spike(p);
  spike.at(0, 0) = 1;
  EXPECT_THROW(analyze(spike), padec::SupportViolation);
  EXPECT_NO_THROW(analyze_dense(spike));
}

TEST(Model, ArcPiecesAreOrthogonalAndSum) {
  std::mt19937_64 rng(3);
  auto p = ModelParams::make(3, 4, 2);
  auto g = random_spectrum(p, rng);
  auto f = synthesize(g);
  for (int m = 1; m <= 2; ++m) {
    auto arcs = partition_unit(3, m);
    std::vector<PhysicalField> pieces;
    for (auto& J : arcs) pieces.push_back(synthesize(project_arc(g, J)));
    PhysicalField total(p);
    for (auto& P : pieces)
      for (std::size_t k = 0; k < P.data.size(); ++k) total.data[k] += P.data[k];
    for (std::size_t k = 0; k < f.data.size(); ++k) EXPECT_LT(std::abs(total.data[k] - f.data[k]), 1e-10);
    for (size_t a = 0; a < pieces.size(); ++a)
      for (size_t b = a + 1; b < pieces.size(); ++b) {
        cplx ip = 0;
        for (std::size_t k = 0; k < f.data.size(); ++k) ip += pieces[a].data[k] * std::conj(pieces[b].data[k]);
        EXPECT_LT(std::abs(ip), 1e-9 * l2_sq(f.data));
      }
    auto viaField = project_arc(f, arcs[1]);
    for (std::size_t k = 0; k < f.data.size(); ++k) EXPECT_LT(std::abs(viaField.data[k] - pieces[1].data[k]), 1e-10);
  }
  EXPECT_THROW(project_arc(g, Interval::make(3, 5, 0)), padec::ResolutionError);
}

TEST(Model, LpNorms) {
  std::vector<cplx> v{{3, 4}, {0, 1}, {-2, 0}};
  EXPECT_DOUBLE_EQ(lp_norm(v, kInfinity), 5.0);
  EXPECT_NEAR(lp_norm(v, 2), std::sqrt(30.0), 1e-14);
  EXPECT_NEAR(lp_norm(v, 1), 8.0, 1e-14);
  EXPECT_GE(lp_norm(v, 4), lp_norm(v, 6));
  EXPECT_THROW(lp_norm(v, 0.5), std::invalid_argument);
}

TEST(Model, IndicatorTransforms) {
  for (auto [q, L] : {std::pair{3, 2}, {3, 4}, {5, 2}}) {
    auto r = verify_indicator_transform(q, L);
    EXPECT_LT(r.ball_deviation, 1e-12 * std::pow(q, L)) << q << " " << L;
    EXPECT_LT(r.tube_deviation, 1e-12) << q << " " << L;
  }
}

TEST(Model, WavepacketsAreConstantOnTubes) {
  std::mt19937_64 rng(12);
  auto p = ModelParams::make(3, 4, 2);
  for (int m : {1, 2})
    for (auto& K : partition_unit(3, m)) {
      auto fK = synthesize(project_arc(random_spectrum(p, rng), K));
      auto t = wavepacket_decompose(fK, K);
      EXPECT_TRUE(t.exact_partition);
      EXPECT_EQ(static_cast<std::int64_t>(t.packets.size()), padec::ipow(3, 2 * 4 - 3 * m));
      EXPECT_LT(t.max_relative_deviation, 1e-9);
      EXPECT_LT(t.energy_mismatch, 1e-9);
      EXPECT_LT(t.ball_constancy, 1e-9);
      EXPECT_EQ(t.reassembly_error, 0.0);
    }
  auto f = synthesize(random_spectrum(p, rng));
  EXPECT_THROW(wavepacket_decompose(f, Interval::make(3, 1, 0)), padec::SupportViolation);
}

TEST(Model, JsonRoundTrip) {
  std::mt19937_64 rng(1);
  auto p = ModelParams::make(5, 2, 1);
  auto g = random_spectrum(p, rng);
  auto back = spectral_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(back.data, g.data);
  EXPECT_EQ(back.params, p);
}
