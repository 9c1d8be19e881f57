#pragma once

// Verification suites shared by the command line tool and the acceptance run.

#include "padec/decoupling.hpp"
#include "padec/fft.hpp"
#include "padec/finite_model.hpp"
#include "padec/geometry.hpp"
#include "padec/iteration.hpp"
#include "padec/report.hpp"

#include <array>
#include <numbers>
#include <random>
#include <set>

namespace padec::suites {

using geometry::Interval;
using model::ModelParams;

namespace detail {

inline std::vector<Interval> intervals_up_to(int q, int kmax) {
  std::vector<Interval> out;
  for (int k = 0; k <= kmax; ++k)
    for (auto& I : geometry::partition_unit(q, k)) out.push_back(I);
  return out;
}

inline std::set<std::int64_t> residues(const Interval& I, int depth) {
  std::set<std::int64_t> s;
  const std::int64_t step = ipow(I.q, I.scale);
  for (std::int64_t x = mod(I.residue, step); x < ipow(I.q, depth); x += step) s.insert(x);
  return s;
}

inline ClaimReport make_report(std::string claim, std::string anchor, ojson config) {
  ClaimReport r;
  r.claim = std::move(claim);
  r.anchor = std::move(anchor);
  r.config = std::move(config);
  return r;
}

}  // namespace detail

// Cell-exact checks of interval and arc geometry for scales q^0 .. q^-kmax.
inline std::vector<ClaimReport> geometry_suite(int q, int kmax, std::uint64_t seed = 0) {
  require_odd_prime(q);
  if (kmax < 1 || kmax > 3) throw InvalidConfig("geometry suite scale must be in [1, 3]");
  const ojson cfg = {{"q", q}, {"max_scale", kmax}};
  const auto all = detail::intervals_up_to(q, kmax);
  std::vector<ClaimReport> out;

  {
    auto r = detail::make_report("interval_partition", "P_{q^-k}(I) splits I into q^(k-j) disjoint intervals of length q^-k", cfg);
    std::int64_t bad = 0;
    for (auto& I : all)
      for (int k = I.scale; k <= kmax; ++k) {
        auto P = geometry::partition(I, k);
        ++r.trials;
        if (static_cast<std::int64_t>(P.size()) != ipow(q, k - I.scale)) ++bad;
        std::set<std::int64_t> seen;
        std::size_t total = 0;
        for (auto& J : P) {
          auto pts = detail::residues(J, kmax);
          total += pts.size();
          seen.insert(pts.begin(), pts.end());
          if (J.length() != qpow(q, -k)) ++bad;
        }
        if (seen != detail::residues(I, kmax) || total != seen.size()) ++bad;
      }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("nesting_trichotomy", "two intervals are nested or disjoint; disjoint ones sit at distance >= the larger length", cfg);
    std::int64_t bad = 0;
    std::vector<std::set<std::int64_t>> pts;
    for (auto& I : all) pts.push_back(detail::residues(I, kmax));
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = 0; b < all.size(); ++b) {
        ++r.trials;
        const auto rel = geometry::interval_relation(all[a], all[b]);
        const bool ab = std::includes(pts[b].begin(), pts[b].end(), pts[a].begin(), pts[a].end());
        const bool ba = std::includes(pts[a].begin(), pts[a].end(), pts[b].begin(), pts[b].end());
        bool ok = false;
        switch (rel.kind) {
          case geometry::Relation::Equal: ok = ab && ba; break;
          case geometry::Relation::FirstInsideSecond: ok = ab && !ba; break;
          case geometry::Relation::SecondInsideFirst: ok = ba && !ab; break;
          case geometry::Relation::Disjoint: {
            Rational best = 2;
            for (auto x : pts[a])
              for (auto y : pts[b]) best = std::min(best, qpow(q, -valuation(x - y, q)));
            ok = !ab && !ba && best == rel.distance &&
                 rel.distance >= std::max(all[a].length(), all[b].length());
            for (auto x : pts[a]) ok = ok && !pts[b].count(x);
            break;
          }
        }
        if (!ok) ++bad;
      }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("shear_invariance", "(x1, x2) -> (x1 + a x2, x2) with |a| <= 1 maps balls onto balls of the same radius", cfg);
    std::int64_t bad = 0;
    auto rng = stream(seed, 1);
    const geometry::Box box{2, 2};
    const geometry::Resolution res{1, 1};
    const std::int64_t side = ipow(q, 3);
    for (int trial = 0; trial < 60; ++trial) {
      const std::int64_t ci = static_cast<std::int64_t>(rng() % side), cj = static_cast<std::int64_t>(rng() % side);
      std::vector<int> digits(6);
      for (auto& d : digits) d = static_cast<int>(rng() % q);
      const auto a = padic::PadicScalar::from_digits(q, 0, digits);
      for (int e : {-1, 0, 1}) {
        ++r.trials;
        const auto B = geometry::ball(q, box, res, ci, cj, e);
        const auto image = geometry::shear(B, a);
        if (image != geometry::ball(q, box, res, ci + a.residue(4) * cj, cj, e) || image.measure() != B.measure())
          ++bad;
      }
    }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("parallelogram_identity", "theta_J = {xi1 in J, |xi2 - 2 a xi1 + a^2| <= |J|^2} for every a in J", cfg);
    std::int64_t bad = 0;
    for (auto& J : all) {
      const int R = 2 * J.scale;
      const auto th = geometry::arc_region(J, {R, R});
      for (std::int64_t u = 0; u < q; ++u) {
        ++r.trials;
        if (th != geometry::arc_parallelogram(J, J.residue + u * ipow(q, J.scale), {R, R})) ++bad;
      }
      if (th.measure() != qpow(q, -3 * J.scale)) ++bad;
    }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("arc_absorption", "theta_J + B(0, |J|^2 / q) = theta_J", cfg);
    std::int64_t bad = 0;
    for (auto& J : all) {
      ++r.trials;
      if (!geometry::arc_absorb_ball(J)) ++bad;
    }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("tube_tiling", "B(0, |K|^-2) is partitioned by |K|^-1 translates of T_{0,K}", cfg);
    std::int64_t bad = 0;
    for (int N = 1; N <= kmax; ++N)
      for (auto& K : geometry::partition_unit(q, N)) {
        ++r.trials;
        const auto t = geometry::tile_box_by_tubes(K, 2 * N);
        if (static_cast<std::int64_t>(t.tubes.size()) != ipow(q, N) || !t.verify_exact()) ++bad;
      }
    r.max_violation = static_cast<double>(bad);
    r.passed = bad == 0;
    r.details["discrepancies"] = bad;
    out.push_back(std::move(r));
  }
  return out;
}

// Highlighted 3x3 blocks of the pictured Q_3 tubes inside B(0, 9), as
// (column block, row block) pairs of the drawing. A cell with leading
// digits (d1, d2) of (x1, x2) is drawn in column block 2 - d2, row block d1.
struct FigurePanel {
  std::string name;
  std::int64_t arc_residue;
  std::int64_t shift;  // x1 translate in units of 1/9
  std::set<std::pair<int, int>> blocks;
};

inline std::vector<FigurePanel> pictured_tubes() {
  return {{"T_{0,I(0,1/3)}", 0, 0, {{0, 0}, {1, 0}, {2, 0}}},
          {"T_{0,I(1,1/3)}", 1, 0, {{2, 0}, {1, 1}, {0, 2}}},
          {"T_{0,I(2,1/3)}", 2, 0, {{2, 0}, {0, 1}, {1, 2}}},
          {"T_{0,I(2,1/3)} + (1/9, 0)", 2, 1, {{2, 1}, {1, 0}, {0, 2}}},
          {"T_{0,I(2,1/3)} + (2/9, 0)", 2, 2, {{0, 0}, {1, 1}, {2, 2}}}};
}

inline ClaimReport figure_suite() {
  auto r = detail::make_report("q3_pictured_tubes", "tubes T_{0,I(a,1/3)} in B(0,9) and the three translates of T_{0,I(2,1/3)}",
                               ojson{{"q", 3}, {"box", 2}, {"resolution", -1}});
  std::int64_t bad = 0;
  ojson panels = ojson::array();
  for (const auto& P : pictured_tubes()) {
    ++r.trials;
    const auto t = geometry::tile_box_by_tubes(Interval::make(3, 1, P.arc_residue), 2, -1);
    const auto region = t.region(t.label(P.shift, 0));
    std::set<std::pair<int, int>> got;
    for (auto [i, j] : region.cells()) got.insert({2 - static_cast<int>(j), static_cast<int>(i)});
    const bool ok = got == P.blocks;
    if (!ok) ++bad;
    panels.push_back({{"panel", P.name}, {"match", ok}});
  }
  // Shifts of the tiling of T_{0,I(2,1/3)}.
  const auto t = geometry::tile_box_by_tubes(Interval::make(3, 1, 2), 2, -1);
  std::set<Rational> shifts;
  for (auto& T : t.tubes) {
    shifts.insert(padic::fractional_part(T.offset.x1));
    if (padic::fractional_part(T.offset.x2) != 0) ++bad;
  }
  if (shifts != std::set<Rational>{Rational(0), Rational(1, 9), Rational(2, 9)}) ++bad;
  if (!t.verify_exact()) ++bad;
  ojson sj = ojson::array();
  for (auto& s : shifts) sj.push_back(to_string(s));
  r.details["panels"] = panels;
  r.details["shifts"] = sj;
  r.max_violation = static_cast<double>(bad);
  r.passed = bad == 0;
  return r;
}

namespace detail {

inline std::vector<cplx> direct_dft(const std::vector<cplx>& in, int sign) {
  const std::size_t n = in.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<long double> acc = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const long double ang = sign * 2.0L * std::numbers::pi_v<long double> * static_cast<long double>((j * k) % n) / n;
      acc += std::complex<long double>(in[j].real(), in[j].imag()) * std::polar(1.0L, ang);
    }
    out[k] = {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
  }
  return out;
}

}  // namespace detail

// Transform identities of the finite model (q, L) over every admissible M.
inline std::vector<ClaimReport> model_suite(int q, int L, int trials, std::uint64_t seed = 0, double tol = 1e-10) {
  require_odd_prime(q);
  if (L < 2 || L > 6 || L % 2) throw InvalidConfig("model suite needs L in {2, 4, 6}");
  if (trials < 1) throw InvalidConfig("trials must be positive");
  const ojson cfg = {{"q", q}, {"L", L}, {"trials", trials}, {"seed", seed}};
  std::vector<ClaimReport> out;
  {
    auto r = detail::make_report("roundtrip_parseval", "synthesis inverts analysis and ||f||_2^2 = Q^2 sum |g|^2", cfg);
    double worst_rt = 0, worst_pars = 0;
    for (int t = 0; t < trials; ++t) {
      auto rng = stream(seed, static_cast<std::uint64_t>(t));
      const int M = 1 + t % (L / 2);
      const auto p = ModelParams::make(q, L, M);
      const auto g = model::random_spectrum(p, rng);
      const auto f = model::synthesize(g);
      const auto back = model::analyze(f);
      double err = 0;
      for (std::size_t k = 0; k < g.data.size(); ++k) err = std::max(err, std::abs(back.data[k] - g.data[k]));
      const double gn = std::sqrt(model::l2_sq(g.data) / static_cast<double>(g.data.size()));
      worst_rt = std::max(worst_rt, err / gn);
      const double lhs = model::l2_sq(f.data), rhs = static_cast<double>(p.points()) * model::l2_sq(g.data);
      worst_pars = std::max(worst_pars, std::abs(lhs - rhs) / rhs);
      ++r.trials;
    }
    r.details["max_roundtrip_error"] = worst_rt;
    r.details["max_parseval_error"] = worst_pars;
    r.empirical_constant = std::max(worst_rt, worst_pars);
    r.max_violation = std::max(0.0, r.empirical_constant - tol);
    r.passed = r.empirical_constant <= tol;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("radix_q_fft", "radix-q transform equals the direct DFT", cfg);
    double worst = 0;
    auto rng = stream(seed, 1u << 20);
    std::normal_distribution<double> gauss;
    for (int lev = 0; lev <= L; ++lev)
      for (int sign : {-1, 1}) {
        std::vector<cplx> v(static_cast<std::size_t>(ipow(q, lev)));
        for (auto& z : v) z = {gauss(rng), gauss(rng)};
        const auto ref = detail::direct_dft(v, sign);
        RadixQFft(q, lev).transform(v, sign);
        double err = 0, scale = 0;
        for (std::size_t k = 0; k < v.size(); ++k) {
          err = std::max(err, std::abs(v[k] - ref[k]));
          scale = std::max(scale, std::abs(ref[k]));
        }
        worst = std::max(worst, err / std::max(1.0, scale));
        ++r.trials;
      }
    r.empirical_constant = worst;
    r.max_violation = std::max(0.0, worst - 1e-12);
    r.passed = worst <= 1e-12;
    out.push_back(std::move(r));
  }
  {
    auto r = detail::make_report("indicator_transforms", "FT of 1_{B(0,q^k)} is q^2k 1_{B(0,q^-k)}; FT of a tube indicator is supported on the dual arc", cfg);
    const auto ind = model::verify_indicator_transform(q, L);
    const double Q = static_cast<double>(ipow(q, L));
    r.trials = ind.arcs_checked + L + 1;
    r.details["ball_deviation_over_Q"] = ind.ball_deviation / Q;
    r.details["tube_deviation"] = ind.tube_deviation;
    r.details["arcs_checked"] = ind.arcs_checked;
    r.empirical_constant = std::max(ind.ball_deviation / Q, ind.tube_deviation);
    r.max_violation = std::max(0.0, r.empirical_constant - 1e-12);
    r.passed = r.empirical_constant <= 1e-12;
    out.push_back(std::move(r));
  }
  if (L >= 2) {
    auto r = detail::make_report("wavepacket_constancy", "|f_K| is constant on every tube of the tiling T(K)", cfg);
    const auto p = ModelParams::thin(q, L);
    double worst = 0, energy = 0, reassembly = 0;
    bool exact = true;
    for (int t = 0; t < trials; ++t) {
      auto rng = stream(seed, (2u << 20) + static_cast<std::uint64_t>(t));
      const int m = 1 + t % p.M;
      auto arcs = geometry::partition_unit(q, m);
      const auto& K = arcs[static_cast<std::size_t>(rng() % arcs.size())];
      const auto fK = model::synthesize(model::project_arc(model::random_spectrum(p, rng), K));
      const auto tab = model::wavepacket_decompose(fK, K);
      worst = std::max(worst, tab.max_relative_deviation);
      energy = std::max(energy, tab.energy_mismatch);
      reassembly = std::max(reassembly, tab.reassembly_error);
      exact = exact && tab.exact_partition;
      ++r.trials;
    }
    r.details["energy_mismatch"] = energy;
    r.details["reassembly_error"] = reassembly;
    r.details["exact_partition"] = exact;
    r.empirical_constant = worst;
    r.max_violation = std::max(0.0, worst - 1e-9);
    r.passed = worst <= 1e-9 && exact && energy <= 1e-9;
    out.push_back(std::move(r));
  }
  return out;
}

struct KeystepSetup {
  int q = 3;
  int L = 4;
  int nu_exp = 1;
  int a = 1;
  int b = 1;
};

// I = I(1, nu^a) and I' = I(0, nu^b) in the thin model.
inline decoupling::BilinearConfig keystep_config(const KeystepSetup& s) {
  return decoupling::BilinearConfig::make(ModelParams::thin(s.q, s.L), s.nu_exp, s.a, s.b,
                                          Interval::make(s.q, s.a * s.nu_exp, 1), Interval::make(s.q, s.b * s.nu_exp, 0));
}

inline std::vector<ClaimReport> keystep_suite(const KeystepSetup& s, int trials, std::uint64_t seed = 0) {
  const auto cfg = keystep_config(s);
  std::vector<ClaimReport> out;
  out.push_back(decoupling::verify_keystep_orthogonality(cfg, trials, seed));
  out.push_back(decoupling::verify_strip_disjointness(cfg, std::min(trials, 50), seed + 1));
  out.push_back(decoupling::verify_fixed_x_orthogonality(cfg, trials, seed + 2));
  if (s.a == s.b) out.push_back(decoupling::verify_ball_inflation(cfg, trials, seed + 3));
  out.push_back(decoupling::verify_subinterval_l2(cfg, trials, seed + 4));
  return out;
}

// Measured lower bounds against the bound chains evaluated with trivial D.
inline ClaimReport consistency_suite(int q, int seeds, std::uint64_t seed = 0) {
  auto r = detail::make_report("bound_chain_consistency",
                               "ascent lower bounds for D_6 and M_{1,1} never exceed the trivial bound chains",
                               ojson{{"q", q}, {"seeds", seeds}, {"seed", seed}});
  const auto D6 = iteration::trivial_dbound(q, 6);
  ojson rows = ojson::array();
  double worst = -1e300;
  for (int L : {2, 4}) {
    const auto p = ModelParams::thin(q, L);
    const auto est = decoupling::ascent_estimate(p, 6, seeds, 30, seed);
    const double bound = iteration::trivial_bounds(q, p.M, 6);
    worst = std::max(worst, est.value - bound);
    rows.push_back({{"quantity", "D_6"}, {"delta_exp", p.M}, {"lower", est.value}, {"bound", bound}});
    ++r.trials;
  }
  {
    const auto cfg = keystep_config({q, 4, 1, 1, 1});
    const auto est = decoupling::bilinear_ascent(cfg, seeds, 30, seed);
    const double bound = iteration::mab_trivial(1, 1, cfg.model.M, 1, D6);
    worst = std::max(worst, est.value - bound);
    rows.push_back({{"quantity", "M_{1,1}"}, {"delta_exp", cfg.model.M}, {"lower", est.value}, {"bound", bound}});
    ++r.trials;
  }
  r.details["rows"] = rows;
  r.max_violation = std::max(0.0, worst);
  r.empirical_constant = worst;
  r.passed = worst <= 1e-9;
  return r;
}

}  // namespace padec::suites
