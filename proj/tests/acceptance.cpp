// Acceptance run: one PASS/FAIL line per criterion.

#include "oracles.hpp"
#include "padec/expsum.hpp"
#include "padec/suites.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace padec;

namespace {

// Pinned tolerances.
constexpr double kRoundTripTol = 1e-10;
constexpr double kFftTol = 1e-12;
constexpr double kL6Seconds = 1.0;
constexpr double kIndicatorTol = 1e-12;
constexpr double kWavepacketTol = 1e-9;
constexpr double kFarCrossTol = 1e-8;
constexpr double kSubintervalTol = 1e-10;
constexpr double kPlancherelTol = 1e-9;
constexpr double kSupTol = 1e-9;
constexpr double kWitnessTol = 1e-6;
constexpr double kGeometrySeconds = 10.0;
constexpr double kJ2000Seconds = 60.0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Check {
  std::ostringstream note;
  bool ok = true;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

bool all_pass(const std::vector<ClaimReport>& rs, Check& c) {
  for (auto& r : rs) c.expect(r.passed, r.claim);
  return all_passed(rs);
}

void ac1(Check& c) {
  const auto t0 = std::chrono::steady_clock::now();
  all_pass(suites::geometry_suite(3, 3), c);
  all_pass(suites::geometry_suite(5, 3), c);
  const auto fig = suites::figure_suite();
  c.expect(fig.passed, "pictured tubes and shifts");
  const double secs = seconds_since(t0);
  c.expect(secs < kGeometrySeconds, "runtime");
  c.note << " runtime=" << secs << "s";
}

void ac2(Check& c) {
  double rt = 0, pars = 0;
  int count = 0;
  for (int q : {3, 5})
    for (int L : {2, 4})
      for (int t = 0; t < 25; ++t, ++count) {
        auto rng = stream(2, static_cast<std::uint64_t>(count));
        const auto p = model::ModelParams::make(q, L, 1 + t % (L / 2));
        const auto g = model::random_spectrum(p, rng);
        const auto f = model::synthesize(g);
        const auto back = model::analyze(f);
        double err = 0;
        for (std::size_t k = 0; k < g.data.size(); ++k) err = std::max(err, std::abs(back.data[k] - g.data[k]));
        rt = std::max(rt, err / std::sqrt(model::l2_sq(g.data) / static_cast<double>(g.data.size())));
        const double lhs = model::l2_sq(f.data), rhs = static_cast<double>(p.points()) * model::l2_sq(g.data);
        pars = std::max(pars, std::abs(lhs - rhs) / rhs);
      }
  c.expect(count == 100, "spectrum count");
  c.expect(rt <= kRoundTripTol, "round trip");
  c.expect(pars <= kRoundTripTol, "parseval");
  double fft = 0;
  auto rng = stream(3, 0);
  std::normal_distribution<double> gauss;
  for (int lev = 0; lev <= 6; ++lev)
    for (int sign : {-1, 1}) {
      std::vector<cplx> v(static_cast<std::size_t>(ipow(3, lev)));
      for (auto& z : v) z = {gauss(rng), gauss(rng)};
      const auto ref = oracle::naive_dft(v, sign);
      RadixQFft(3, lev).transform(v, sign);
      double err = 0, scale = 1;
      for (std::size_t k = 0; k < v.size(); ++k) {
        err = std::max(err, std::abs(v[k] - ref[k]));
        scale = std::max(scale, std::abs(ref[k]));
      }
      fft = std::max(fft, err / scale);
    }
  c.expect(fft <= kFftTol, "fft vs naive dft");
  const auto p6 = model::ModelParams::thin(3, 6);
  auto rng6 = stream(4, 0);
  const auto g6 = model::random_spectrum(p6, rng6);
  const auto t0 = std::chrono::steady_clock::now();
  const auto f6 = model::synthesize(g6);
  const double secs = seconds_since(t0);
  c.expect(f6.data.size() == 729u * 729u, "L=6 size");
  c.expect(secs < kL6Seconds, "L=6 transform time");
  c.note << " roundtrip=" << rt << " parseval=" << pars << " fft=" << fft << " L6=" << secs << "s";
}

void ac3(Check& c) {
  double worst = 0;
  int arcs = 0;
  for (int L : {2, 4}) {
    const auto r = model::verify_indicator_transform(3, L);
    worst = std::max({worst, r.ball_deviation / static_cast<double>(ipow(3, L)), r.tube_deviation});
    arcs += r.arcs_checked;
  }
  c.expect(worst <= kIndicatorTol, "indicator deviation");
  c.note << " deviation=" << worst << " arcs=" << arcs;
}

void ac4(Check& c) {
  const auto rs = suites::model_suite(3, 4, 50, 5);
  for (auto& r : rs)
    if (r.claim == "wavepacket_constancy") {
      c.expect(r.passed && r.trials == 50 && r.empirical_constant <= kWavepacketTol, "wavepacket constancy");
      c.note << " deviation=" << r.empirical_constant;
    }
}

void ac5(Check& c) {
  const auto rs = suites::keystep_suite({3, 4, 1, 1, 1}, 100, 11);
  all_pass(rs, c);
  for (auto& r : rs) {
    if (r.claim == "keystep_orthogonality") {
      const double far = r.details["max_far_cross_over_diagonal"].get<double>();
      c.expect(far <= kFarCrossTol, "far cross integrals");
      c.note << " far_cross=" << far;
    }
    if (r.claim == "strip_disjointness") c.expect(r.details["exact_containment"].get<bool>(), "exact strips");
    if (r.claim == "subinterval_l2") {
      c.expect(r.empirical_constant <= 1 + kSubintervalTol, "sub-interval constant 1");
      c.note << " subinterval_C=" << r.empirical_constant;
    }
    if (r.claim == "ball_inflation") c.note << " inflation_C=" << r.empirical_constant;
    if (r.claim == "fixed_x_orthogonality") c.note << " fixed_x_C=" << r.empirical_constant;
  }
}

void ac6(Check& c) {
  const auto p2 = model::ModelParams::thin(3, 2);
  const auto d2 = decoupling::ascent_estimate(p2, 2, 4, 30, 1);
  c.expect(std::abs(d2.value - 1) <= kPlancherelTol, "D_2 = 1");
  const auto dinf = decoupling::ascent_estimate(p2, model::kInfinity, 6, 40, 2);
  c.expect(dinf.value <= std::sqrt(3.0) + kSupTol, "D_inf <= sqrt(q)");
  const auto w = decoupling::lower_bound_examples(model::ModelParams::thin(3, 4), 10);
  c.expect(w.value >= std::pow(9.0, 0.2) - kWitnessTol, "p=10 witness");
  int violations = 0;
  for (double p : {2.0, 4.0, 6.0, model::kInfinity}) {
    const auto r = decoupling::verify_projection_contraction(model::ModelParams::thin(3, 4), p, 100, 3);
    violations += r.violations;
  }
  c.expect(violations == 0, "projection contraction");
  c.note << " D2=" << d2.value << " Dinf=" << dinf.value << " witness10=" << w.value << " violations=" << violations;
}

void ac7(Check& c) {
  c.expect(expsum::count_vmvt(1) == 1 && expsum::count_vmvt(2) == 20 && expsum::count_vmvt(3) == 93, "J(1..3)");
  for (int N = 1; N <= 12; ++N) c.expect(expsum::count_vmvt(N) == oracle::brute_vmvt(N), "J vs oracle");
  auto rng = stream(6, 0);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int t = 0; t < 20; ++t) {
    std::vector<cplx> a(static_cast<std::size_t>(1 + t % 10));
    for (auto& z : a) z = {static_cast<double>(d(rng)), static_cast<double>(d(rng))};
    const auto ref = oracle::brute_weighted(a);
    c.expect(expsum::weighted_sixth_moment(a) == ref.real() && ref.imag() == 0, "weighted moment");
  }
  const auto eq = expsum::verify_congruence_equivalence(3, 1);
  c.expect(eq.equal && eq.solution_count == 93 && eq.method == "exhaustive", "congruence equivalence");
  const auto t0 = std::chrono::steady_clock::now();
  const auto J = expsum::count_vmvt(2000);
  const double secs = seconds_since(t0);
  c.expect(secs < kJ2000Seconds, "J(2000) time");
  c.note << " J(2000)=" << J << " time=" << secs << "s";
}

void ac8(Check& c) {
  for (int N = 1; N <= 20; ++N) c.expect(iteration::iter1_weights(N).sum() == 1, "weights telescope");
  const auto s = iteration::fixed_point_driver(1, Rational(1, 2), Rational(1, 1000));
  c.expect(!s.trace.empty() && s.trace[0].N == 5 && s.trace[0].lambda_exact == Rational(31, 64), "first step");
  c.expect(s.terminated, "reaches 1e-3");
  const auto again = iteration::fixed_point_driver(1, Rational(1, 2), Rational(1, 1000));
  c.expect(s.csv() == again.csv(), "bit-reproducible");
  c.note << " rows=" << s.trace.size() << " rounds_digits=" << s.total_rounds.str().size()
         << " final=" << s.final_lambda;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> acs = {
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},
      {"AC5", ac5}, {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}};
  int failed = 0;
  for (auto& [name, fn] : acs) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.note << " [exception: " << e.what() << "]";
    }
    std::cout << name << ' ' << (c.ok ? "PASS" : "FAIL") << c.note.str() << std::endl;
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
