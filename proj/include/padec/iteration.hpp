#pragma once

#include "padec/core.hpp"

#include <mpfr.h>

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace padec::iteration {

// Scales are written q^{-e}; a DBound maps e to a bound for D(q^{-e}).
using DBound = std::function<double(std::int64_t)>;

// Exponent of the trivial bound D_p(delta) <= delta^{-x}, interpolating
// D_2 = 1 and D_inf <= delta^{-1/2}: x = 1/2 - 1/p.
inline double trivial_exponent(double p) {
  if (!(p >= 2)) throw InvalidConfig("p must be >= 2");
  return std::isinf(p) ? 0.5 : 0.5 - 1.0 / p;
}

inline Rational trivial_exponent_exact(std::int64_t p) {
  if (p < 2) throw InvalidConfig("p must be >= 2");
  return Rational(p - 2, 2 * p);
}

inline double trivial_bounds(std::int64_t q, std::int64_t delta_exp, double p) {
  if (delta_exp < 0) throw InvalidConfig("delta must be <= 1");
  return std::pow(static_cast<double>(q), static_cast<double>(delta_exp) * trivial_exponent(p));
}

inline DBound trivial_dbound(std::int64_t q, double p) {
  const double x = trivial_exponent(p);
  return [q, x](std::int64_t e) { return std::pow(static_cast<double>(q), static_cast<double>(e) * x); };
}

inline DBound unit_dbound() {
  return [](std::int64_t) { return 1.0; };
}

// M_{a,b}(delta, nu) <= D(delta / nu^a)^{1/3} D(delta / nu^b)^{2/3}.
inline double mab_trivial(std::int64_t a, std::int64_t b, std::int64_t delta_exp, std::int64_t nu_exp,
                          const DBound& D) {
  if (a < 1 || b < 1 || nu_exp < 1) throw InvalidConfig("a, b and the nu exponent must be positive");
  if (delta_exp < std::max(a, b) * nu_exp) throw InvalidConfig("need delta <= min(nu^a, nu^b)");
  return std::cbrt(D(delta_exp - a * nu_exp)) * std::pow(D(delta_exp - b * nu_exp), 2.0 / 3.0);
}

struct ConstantsLedger {
  std::int64_t q = 3;
  double C1 = 27;
  double C2 = 27;
  Rational C3 = 12;

  static ConstantsLedger defaults(std::int64_t q) {
    require_odd_prime(q);
    const double q3 = static_cast<double>(q) * q * q;
    return {q, q3, q3, Rational(12)};
  }

  void validate() const {
    require_odd_prime(q);
    if (!(C1 > 0) || !(C2 > 0) || std::isinf(C1) || std::isinf(C2) || C3 <= 0)
      throw InvalidConfig("ledger constants must be positive and finite");
  }
};

// Exponents attached to D(delta/nu^{2^{N-1}}), D(delta/nu^{2^N}) and
// D(delta/nu^{2^j}), j < N, after N key-step/climb rounds.
struct ChainWeights {
  int N = 0;
  Rational first;
  Rational second;
  std::vector<Rational> chain;

  Rational sum() const {
    Rational s = first + second;
    for (auto& w : chain) s += w;
    return s;
  }
};

inline ChainWeights iter1_weights(int N) {
  if (N < 1 || N > 62) throw InvalidConfig("N must be in [1, 62]");
  const Rational two_n = Rational(BigInt(1) << N);
  ChainWeights w{N, Rational(1) / (3 * two_n), Rational(2) / (3 * two_n), {}};
  for (int j = 0; j < N; ++j) w.chain.push_back(Rational(1) / Rational(BigInt(1) << (j + 1)));
  return w;
}

struct ChainValue {
  double bilinear = 0;  // bound for M_{1,1}(delta, nu)
  double linear = 0;    // bound for D(delta)
};

// nu^{-O(1)} is realized as nu^{-C3}.
inline ChainValue iter_chain(int N, const ConstantsLedger& led, const DBound& D, std::int64_t delta_exp,
                             std::int64_t nu_exp) {
  led.validate();
  if (nu_exp < 1) throw InvalidConfig("nu must be < 1");
  const auto w = iter1_weights(N);
  if (delta_exp < (std::int64_t{1} << N) * nu_exp) throw InvalidConfig("need delta <= nu^(2^N)");
  const double q = static_cast<double>(led.q);
  const double loss = std::pow(q, static_cast<double>(nu_exp) * led.C3.convert_to<double>());
  double v = led.C1 * led.C1 * loss;
  v *= std::pow(D(delta_exp - (std::int64_t{1} << (N - 1)) * nu_exp), w.first.convert_to<double>());
  v *= std::pow(D(delta_exp - (std::int64_t{1} << N) * nu_exp), w.second.convert_to<double>());
  for (int j = 0; j < N; ++j)
    v *= std::pow(D(delta_exp - (std::int64_t{1} << j) * nu_exp), w.chain[j].convert_to<double>());
  return {v, led.C2 * D(delta_exp - nu_exp) + led.C2 * v};
}

// C2 (D(delta/nu) + nu^{-C3} M_{1,1}).
inline double bilinear_reduction_value(double D_coarse, double M11, std::int64_t q, std::int64_t nu_exp,
                                       double C2, const Rational& C3) {
  if (D_coarse < 0 || M11 < 0 || C2 < 0) throw InvalidConfig("inputs must be nonnegative");
  const double loss = std::pow(static_cast<double>(q), static_cast<double>(nu_exp) * C3.convert_to<double>());
  return C2 * (D_coarse + loss * M11);
}

inline double climb_value(double M_ba, double D_b) {
  if (M_ba < 0 || D_b < 0) throw InvalidConfig("inputs must be nonnegative");
  return std::sqrt(M_ba * D_b);
}

// Smallest N >= 1 with 5/6 + N/2 - C3/lambda >= 1.
inline BigInt minimal_depth(const Rational& C3, const Rational& lambda) {
  const Rational need = Rational(1, 3) + 2 * C3 / lambda;
  BigInt n = numerator(need) / denominator(need);
  if (Rational(n) < need) ++n;
  return n < 1 ? BigInt(1) : n;
}

// lambda (1 - 2^{-N} (5/6 + N/2 - C3/lambda)) <= lambda (1 - 2^{-N}) whenever the depth condition holds.
inline bool contradiction_step_holds(const Rational& C3, const Rational& lambda, int N) {
  if (lambda <= 0 || N < 1) throw InvalidConfig("need lambda > 0 and N >= 1");
  const Rational gain = Rational(5, 6) + Rational(N, 2) - C3 / lambda;
  const Rational scale = Rational(1) / Rational(BigInt(1) << N);
  const Rational lhs = lambda * (1 - scale * gain);
  const Rational rhs = lambda * (1 - scale);
  return gain >= 1 ? lhs <= rhs : true;
}

inline Rational parse_rational(const std::string& s) {
  auto bad = [&] { return InvalidConfig("not a rational number: '" + s + "'"); };
  if (s.empty()) throw bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    try {
      const BigInt n(s.substr(0, slash)), d(s.substr(slash + 1));
      if (d == 0) throw bad();
      return Rational(n, d);
    } catch (const std::runtime_error&) {
      throw bad();
    }
  }
  std::size_t i = 0;
  bool neg = false;
  if (s[0] == '-' || s[0] == '+') neg = s[i++] == '-';
  BigInt num = 0, den = 1;
  bool dot = false, digits = false;
  for (; i < s.size(); ++i) {
    if (s[i] == '.' && !dot) {
      dot = true;
    } else if (s[i] >= '0' && s[i] <= '9') {
      num = num * 10 + (s[i] - '0');
      if (dot) den *= 10;
      digits = true;
    } else {
      throw bad();
    }
  }
  if (!digits) throw bad();
  return Rational(neg ? -num : num, den);
}

struct TraceRow {
  BigInt round;  // index of the last round in this row
  BigInt N;
  std::optional<Rational> lambda_exact;
  std::string lambda_decimal;
  BigInt rounds_in_row;
};

struct ExponentState {
  Rational C3;
  Rational lambda0;
  Rational epsilon;
  std::vector<TraceRow> trace;
  BigInt total_rounds = 0;
  std::string final_lambda;
  bool terminated = false;
  std::string stop_reason;

  std::string csv() const {
    std::ostringstream os;
    os << "round,N,lambda_exact,lambda_decimal,rounds_in_row\n";
    for (auto& r : trace)
      os << r.round << ',' << r.N << ',' << (r.lambda_exact ? to_string(*r.lambda_exact) : std::string("")) << ','
         << r.lambda_decimal << ',' << r.rounds_in_row << '\n';
    return os.str();
  }
};

namespace detail {

struct Mpfr {
  mpfr_t v;
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v, prec); }
  ~Mpfr() { mpfr_clear(v); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
};

inline void set_rational(mpfr_t out, const Rational& r) {
  const std::string n = numerator(r).str(), d = denominator(r).str();
  mpfr_t den;
  mpfr_init2(den, mpfr_get_prec(out));
  mpfr_set_str(out, n.c_str(), 10, MPFR_RNDN);
  mpfr_set_str(den, d.c_str(), 10, MPFR_RNDN);
  mpfr_div(out, out, den, MPFR_RNDN);
  mpfr_clear(den);
}

inline std::string decimal(const mpfr_t x) {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.25Rg", x);
  std::string s(buf);
  mpfr_free_str(buf);
  return s;
}

inline std::string decimal(const Rational& r, mpfr_prec_t prec = 256) {
  Mpfr x(prec);
  set_rational(x.v, r);
  return decimal(x.v);
}

inline BigInt to_bigint(const mpfr_t x) {
  char* buf = nullptr;
  mpfr_asprintf(&buf, "%.0Rf", x);
  BigInt b{std::string(buf)};
  mpfr_free_str(buf);
  return b;
}

}  // namespace detail

// Iterates lambda <- lambda (1 - 2^{-N}) with N minimal, until lambda < epsilon.
// Rounds are replayed one at a time in exact arithmetic while a depth
// segment is short; longer segments are summed in closed form.
inline ExponentState fixed_point_driver(const Rational& C3, const Rational& lambda0, const Rational& epsilon,
                                        const BigInt& max_rounds = BigInt(1) << 100000,
                                        std::size_t max_rows = 1'000'000) {
  if (C3 <= 0) throw InvalidConfig("C3 must be positive");
  if (lambda0 <= 0 || lambda0 > Rational(1, 2)) throw InvalidConfig("lambda0 must lie in (0, 1/2]");
  if (epsilon <= 0) throw InvalidConfig("epsilon must be positive");
  constexpr std::int64_t kExactSegment = 64;
  constexpr std::int64_t kExactBudget = 4096;

  ExponentState st{C3, lambda0, epsilon, {}, 0, "", false, ""};
  Rational lam = lambda0;
  BigInt round = 0;
  bool exact = true;
  std::int64_t exact_rounds = 0;
  mpfr_prec_t prec = 256;
  detail::Mpfr lam_f(prec);
  detail::set_rational(lam_f.v, lam);

  auto eps_f_below = [&](const mpfr_t x) {
    detail::Mpfr e(mpfr_get_prec(x));
    detail::set_rational(e.v, epsilon);
    return mpfr_less_p(x, e.v) != 0;
  };

  while (true) {
    if (exact ? lam < epsilon : eps_f_below(lam_f.v)) {
      st.terminated = true;
      st.stop_reason = "lambda below epsilon";
      break;
    }
    if (round >= max_rounds) {
      st.stop_reason = "round guard reached";
      break;
    }
    if (st.trace.size() >= max_rows) {
      st.stop_reason = "row guard reached";
      break;
    }
    // Depth n holds while lambda >= B_n = 6 C3 / (3n - 1).
    BigInt n;
    if (exact) {
      n = minimal_depth(C3, lam);
    } else {
      detail::Mpfr need(prec), c3(prec);
      detail::set_rational(c3.v, C3);
      mpfr_mul_ui(need.v, c3.v, 2, MPFR_RNDN);
      mpfr_div(need.v, need.v, lam_f.v, MPFR_RNDN);
      mpfr_ceil(need.v, need.v);
      n = detail::to_bigint(need.v);
      // Settle rounding at the boundary: n is minimal with lambda >= B_n.
      auto at_least_bound = [&](const BigInt& m) {
        detail::Mpfr b(prec);
        detail::set_rational(b.v, 6 * C3 / Rational(3 * m - 1));
        return mpfr_greaterequal_p(lam_f.v, b.v) != 0;
      };
      if (n < 1) n = 1;
      while (!at_least_bound(n)) ++n;
      while (n > 1 && at_least_bound(n - 1)) --n;
    }
    if (n > 1'000'000) {
      st.stop_reason = "depth guard reached";
      break;
    }
    const auto nn = static_cast<std::int64_t>(n);
    const Rational bound = 6 * C3 / (3 * nn - 1);
    const Rational target = bound > epsilon ? bound : epsilon;

    // Rounds k in this segment: smallest k with lam (1 - 2^{-n})^k < target.
    const mpfr_prec_t need_prec = static_cast<mpfr_prec_t>(nn) + 192;
    if (need_prec > prec) {
      prec = need_prec;
      mpfr_prec_round(lam_f.v, prec, MPFR_RNDN);
    }
    detail::Mpfr lf(prec), t(prec), k(prec);
    mpfr_set_si_2exp(lf.v, -1, -nn, MPFR_RNDN);
    mpfr_log1p(lf.v, lf.v, MPFR_RNDN);
    detail::set_rational(t.v, target);
    mpfr_div(t.v, t.v, lam_f.v, MPFR_RNDN);
    mpfr_log(t.v, t.v, MPFR_RNDN);
    mpfr_div(k.v, t.v, lf.v, MPFR_RNDN);
    mpfr_floor(k.v, k.v);
    mpfr_add_ui(k.v, k.v, 1, MPFR_RNDN);
    BigInt rounds = detail::to_bigint(k.v);
    if (rounds < 1) rounds = 1;
    if (round + rounds > max_rounds) rounds = max_rounds - round;

    if (exact && rounds <= kExactSegment && exact_rounds + rounds <= kExactBudget) {
      const Rational f = 1 - Rational(1) / Rational(BigInt(1) << static_cast<unsigned>(nn));
      // Step one round at a time; the depth is recomputed exactly each round.
      lam *= f;
      ++round;
      ++exact_rounds;
      st.trace.push_back({round, n, lam, detail::decimal(lam), 1});
      detail::set_rational(lam_f.v, lam);
      continue;
    }
    exact = false;
    {
      detail::Mpfr kk(prec), lg(prec);
      mpfr_set_str(kk.v, rounds.str().c_str(), 10, MPFR_RNDN);
      mpfr_mul(lg.v, kk.v, lf.v, MPFR_RNDN);
      mpfr_exp(lg.v, lg.v, MPFR_RNDN);
      mpfr_mul(lam_f.v, lam_f.v, lg.v, MPFR_RNDN);
    }
    round += rounds;
    st.trace.push_back({round, n, std::nullopt, detail::decimal(lam_f.v), rounds});
  }
  st.total_rounds = round;
  st.final_lambda = exact ? detail::decimal(lam) : detail::decimal(lam_f.v);
  return st;
}

}  // namespace padec::iteration
