#pragma once

#include "padec/finite_model.hpp"
#include "padec/parallel.hpp"
#include "padec/report.hpp"

#include <functional>
#include <map>

namespace padec::decoupling {

using geometry::Interval;
using model::ModelParams;
using model::PhysicalField;
using model::SpectralCoeffs;

struct RatioParts {
  double numerator = 0;
  double denominator = 0;
  double value = 0;
};

inline PhysicalField arc_field(const SpectralCoeffs& g, const Interval& K) {
  return model::synthesize(model::project_arc(g, K));
}

// ||f||_p / (sum_K ||f_K||_p^2)^(1/2) over arcs K of scale m.
inline RatioParts decoupling_ratio(const SpectralCoeffs& g, double p, int m) {
  RatioParts r;
  r.numerator = model::lp_norm(model::synthesize(g), p);
  double s = 0;
  for (auto& K : geometry::partition_unit(g.params.q, m)) {
    const double n = model::lp_norm(arc_field(g, K), p);
    s += n * n;
  }
  r.denominator = std::sqrt(s);
  r.value = r.denominator > 0 ? r.numerator / r.denominator : 0.0;
  return r;
}

struct DecouplingEstimate {
  ModelParams params;
  double p = 2;
  int arc_scale = 1;
  double value = 0;
  SpectralCoeffs witness;
  std::string method;
  bool converged = true;

  double recompute() const { return decoupling_ratio(witness, p, arc_scale).value; }
};

// One arc of scale M filled with ones: f = f_K.
inline SpectralCoeffs single_arc_example(const ModelParams& p) {
  SpectralCoeffs g(p);
  const Interval K = Interval::make(p.q, p.M, 0);
  for (std::int64_t c = 0; c < p.side(); ++c)
    if (K.contains(c))
      for (std::int64_t e = 0; e < p.thickness(); ++e) g.at(c, e) = 1;
  return g;
}

// Ones on the whole thick parabola.
inline SpectralCoeffs spread_example(const ModelParams& p) {
  SpectralCoeffs g(p);
  for (auto& z : g.data) z = 1;
  return g;
}

inline DecouplingEstimate lower_bound_examples(const ModelParams& params, double p) {
  DecouplingEstimate best{params, p, params.M, -1, SpectralCoeffs(params), "examples", true};
  for (auto g : {single_arc_example(params), spread_example(params)}) {
    const double v = decoupling_ratio(g, p, params.M).value;
    if (v > best.value) {
      best.value = v;
      best.witness = std::move(g);
    }
  }
  return best;
}

namespace detail {

inline void normalize(SpectralCoeffs& g) {
  const double n = std::sqrt(model::l2_sq(g.data));
  if (n > 0)
    for (auto& z : g.data) z /= n;
}

// (S^H h)(c, e) = sum_n h(n) e(-(c n1 + eta n2) / Q), restricted to arc K when given.
inline void accumulate_adjoint(const PhysicalField& h, cplx weight, SpectralCoeffs& out,
                               const Interval* K = nullptr) {
  const auto H = model::analyze_dense(h);
  const double Q2 = static_cast<double>(h.params.points());
  for (std::int64_t c = 0; c < h.params.side(); ++c) {
    if (K && !K->contains(c)) continue;
    for (std::int64_t e = 0; e < h.params.thickness(); ++e) out.at(c, e) += weight * Q2 * H.at(c, out.eta(c, e));
  }
}

// h = |u|^(p-2) u with u = f / max|f|; returns (max|f|, sum |u|^p).
inline std::pair<double, double> power_weight(const PhysicalField& f, double p, PhysicalField& h) {
  h = PhysicalField(f.params);
  double m = 0;
  for (auto& z : f.data) m = std::max(m, std::abs(z));
  if (m == 0) return {0.0, 0.0};
  double A = 0;
  for (std::size_t n = 0; n < f.data.size(); ++n) {
    const cplx u = f.data[n] / m;
    const double a = std::abs(u);
    A += std::pow(a, p);
    h.data[n] = a > 0 ? std::pow(a, p - 2) * u : cplx(0);
  }
  return {m, A};
}

struct AscentResult {
  SpectralCoeffs best;
  double value = 0;
  bool converged = false;
};

// Backtracking ascent on a scale-invariant objective along a supplied direction.
template <class Value, class Direction>
AscentResult ascend(SpectralCoeffs g, Value value, Direction direction, int steps) {
  normalize(g);
  AscentResult r{g, value(g), false};
  double t = 0.5;
  for (int it = 0; it < steps; ++it) {
    SpectralCoeffs d = direction(r.best);
    const double dn = std::sqrt(model::l2_sq(d.data));
    if (!(dn > 1e-14)) {
      r.converged = true;
      return r;
    }
    bool moved = false;
    for (int tries = 0; tries < 24 && !moved; ++tries, t *= 0.5) {
      SpectralCoeffs cand = r.best;
      for (std::size_t k = 0; k < cand.data.size(); ++k) cand.data[k] += (t / dn) * d.data[k];
      normalize(cand);
      const double v = value(cand);
      if (v > r.value * (1 + 1e-12)) {
        r.best = std::move(cand);
        r.value = v;
        moved = true;
      }
    }
    if (!moved) {
      r.converged = true;
      return r;
    }
    t = std::min(1.0, t * 4);
  }
  return r;
}

}  // namespace detail

// Wirtinger gradient of log of the decoupling ratio at exponent p.
inline SpectralCoeffs log_ratio_gradient(const SpectralCoeffs& g, double p, int m) {
  SpectralCoeffs grad(g.params);
  PhysicalField h;
  auto [mf, A] = detail::power_weight(model::synthesize(g), p, h);
  if (A == 0) return grad;
  detail::accumulate_adjoint(h, 1.0 / (2 * mf * A), grad);
  SpectralCoeffs sub(g.params);
  double B = 0;
  for (auto& K : geometry::partition_unit(g.params.q, m)) {
    PhysicalField hk;
    auto [mk, Ak] = detail::power_weight(arc_field(g, K), p, hk);
    if (Ak == 0) continue;
    B += mk * mk * std::pow(Ak, 2 / p);
    detail::accumulate_adjoint(hk, mk * std::pow(Ak, 2 / p - 1), sub, &K);
  }
  for (std::size_t k = 0; k < grad.data.size(); ++k) grad.data[k] -= sub.data[k] / (2 * B);
  return grad;
}

// Best ratio over the two examples and `seeds` random starts.
inline DecouplingEstimate ascent_estimate(const ModelParams& params, double p, int seeds = 10, int steps = 60,
                                          std::uint64_t seed = 0) {
  if (!(p >= 2)) throw InvalidConfig("ascent needs p >= 2");
  if (seeds < 1) throw InvalidConfig("seeds must be >= 1");
  const int m = params.M;
  const double ps = std::isinf(p) ? 48.0 : p;  // smooth surrogate for the sup norm
  auto value = [&](const SpectralCoeffs& g) { return decoupling_ratio(g, p, m).value; };
  auto dir = [&](const SpectralCoeffs& g) { return log_ratio_gradient(g, ps, m); };

  std::vector<SpectralCoeffs> starts{single_arc_example(params), spread_example(params)};
  for (int s = 0; s < seeds; ++s) {
    auto rng = stream(seed, static_cast<std::uint64_t>(s));
    starts.push_back(model::random_spectrum(params, rng));
  }
  std::vector<detail::AscentResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { results[i] = detail::ascend(starts[i], value, dir, steps); });

  DecouplingEstimate best{params, p, m, -1, SpectralCoeffs(params), "ascent", true};
  for (auto& r : results)
    if (r.value > best.value) {
      best.value = r.value;
      best.witness = r.best;
      best.converged = r.converged;
    }
  return best;
}

struct ContractionReport {
  double p = 2;
  int trials = 0;
  int violations = 0;
  double max_ratio = 0;  // max ||f_K||_p / ||f||_p
};

// ||f_K||_p <= ||f||_p for every arc K of scale 1..M on random spectra.
inline ContractionReport verify_projection_contraction(const ModelParams& params, double p, int trials,
                                                       std::uint64_t seed = 0) {
  ContractionReport r{p, trials, 0, 0};
  std::vector<double> worst(static_cast<std::size_t>(trials), 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    auto rng = stream(seed, t);
    const auto g = model::random_spectrum(params, rng);
    const double full = model::lp_norm(model::synthesize(g), p);
    for (int m = 1; m <= params.M; ++m)
      for (auto& K : geometry::partition_unit(params.q, m))
        worst[t] = std::max(worst[t], model::lp_norm(arc_field(g, K), p) / full);
  });
  for (double w : worst) {
    r.max_ratio = std::max(r.max_ratio, w);
    if (w > 1 + 1e-10) ++r.violations;
  }
  return r;
}

// Bilinear setting: |I| = nu^a, |I'| = nu^b, nu = q^-n, d(I, I') >= q nu.
struct BilinearConfig {
  ModelParams model;
  int nu_exp = 1;
  int a = 1, b = 1;
  Interval I, Iprime;

  static BilinearConfig make(const ModelParams& model, int nu_exp, int a, int b, const Interval& I,
                             const Interval& Iprime) {
    if (nu_exp < 1 || a < 1 || b < 1) throw InvalidConfig("nu exponent and a, b must be >= 1");
    if (I.q != model.q || Iprime.q != model.q) throw InvalidConfig("intervals use a different prime");
    if (I.scale != a * nu_exp) throw InvalidConfig("|I| must equal nu^a");
    if (Iprime.scale != b * nu_exp) throw InvalidConfig("|I'| must equal nu^b");
    if (model.M < std::max(a, b) * nu_exp) throw InvalidConfig("delta must not exceed min(nu^a, nu^b)");
    const auto rel = geometry::interval_relation(I, Iprime);
    if (rel.kind != geometry::Relation::Disjoint || rel.distance < qpow(model.q, 1 - nu_exp))
      throw InvalidConfig("separation d(I, I') >= q nu fails");
    return {model, nu_exp, a, b, I, Iprime};
  }

  Rational nu() const { return qpow(model.q, -nu_exp); }

  ojson to_json() const {
    ojson j;
    j["q"] = model.q;
    j["L"] = model.L;
    j["M"] = model.M;
    j["nu_exp"] = nu_exp;
    j["a"] = a;
    j["b"] = b;
    j["I"] = {I.residue, I.scale};
    j["I_prime"] = {Iprime.residue, Iprime.scale};
    return j;
  }
};

struct BilinearParts {
  double numerator = 0;  // sum |f_I|^2 |f_I'|^4
  double denom_I = 0;    // sum_{K in I} ||f_K||_6^2
  double denom_Ip = 0;   // sum_{K' in I'} ||f_K'||_6^2
  double value = 0;
};

inline double sum_sq_l6(const SpectralCoeffs& g, const Interval& I, int m) {
  double s = 0;
  for (auto& K : geometry::partition(I, m)) {
    const double n = model::lp_norm(arc_field(g, K), 6);
    s += n * n;
  }
  return s;
}

inline BilinearParts bilinear_ratio(const BilinearConfig& cfg, const SpectralCoeffs& g) {
  BilinearParts r;
  const auto u = arc_field(g, cfg.I), v = arc_field(g, cfg.Iprime);
  for (std::size_t n = 0; n < u.data.size(); ++n) {
    const double b2 = std::norm(v.data[n]);
    r.numerator += std::norm(u.data[n]) * b2 * b2;
  }
  r.denom_I = sum_sq_l6(g, cfg.I, cfg.model.M);
  r.denom_Ip = sum_sq_l6(g, cfg.Iprime, cfg.model.M);
  const double den = r.denom_I * r.denom_Ip * r.denom_Ip;
  r.value = (r.numerator > 0 && den > 0) ? std::pow(r.numerator / den, 1.0 / 6.0) : 0.0;
  return r;
}

struct BilinearEstimate {
  BilinearConfig config;
  double value = 0;
  SpectralCoeffs witness;
  bool converged = true;
};

inline SpectralCoeffs bilinear_gradient(const BilinearConfig& cfg, const SpectralCoeffs& g) {
  const ModelParams& p = cfg.model;
  SpectralCoeffs grad(p);
  const auto u = arc_field(g, cfg.I), v = arc_field(g, cfg.Iprime);
  PhysicalField hu(p), hv(p);
  double N = 0;
  for (std::size_t n = 0; n < u.data.size(); ++n) {
    const double a2 = std::norm(u.data[n]), b2 = std::norm(v.data[n]);
    N += a2 * b2 * b2;
    hu.data[n] = u.data[n] * b2 * b2;
    hv.data[n] = 2.0 * a2 * b2 * v.data[n];
  }
  if (N == 0) return grad;
  detail::accumulate_adjoint(hu, 1.0 / N, grad, &cfg.I);
  detail::accumulate_adjoint(hv, 1.0 / N, grad, &cfg.Iprime);
  auto denominator_term = [&](const Interval& I, double factor) {
    SpectralCoeffs sub(p);
    double D = 0;
    for (auto& K : geometry::partition(I, p.M)) {
      PhysicalField hk;
      auto [mk, Ak] = detail::power_weight(arc_field(g, K), 6, hk);
      if (Ak == 0) continue;
      D += mk * mk * std::cbrt(Ak);
      detail::accumulate_adjoint(hk, mk * std::pow(Ak, -2.0 / 3.0), sub, &K);
    }
    if (D > 0)
      for (std::size_t k = 0; k < grad.data.size(); ++k) grad.data[k] -= factor * sub.data[k] / D;
  };
  denominator_term(cfg.I, 1.0);
  denominator_term(cfg.Iprime, 2.0);
  return grad;
}

// Random spectrum carried by I and I' only.
inline SpectralCoeffs random_bilinear_spectrum(const BilinearConfig& cfg, std::mt19937_64& rng) {
  auto g = model::random_spectrum(cfg.model, rng);
  for (std::int64_t c = 0; c < cfg.model.side(); ++c)
    if (!cfg.I.contains(c) && !cfg.Iprime.contains(c))
      for (std::int64_t e = 0; e < cfg.model.thickness(); ++e) g.at(c, e) = 0;
  return g;
}

inline BilinearEstimate bilinear_ascent(const BilinearConfig& cfg, int seeds = 10, int steps = 60,
                                        std::uint64_t seed = 0) {
  auto value = [&](const SpectralCoeffs& g) { return bilinear_ratio(cfg, g).value; };
  auto dir = [&](const SpectralCoeffs& g) { return bilinear_gradient(cfg, g); };
  std::vector<SpectralCoeffs> starts;
  {
    SpectralCoeffs ones(cfg.model);
    for (std::int64_t c = 0; c < cfg.model.side(); ++c)
      if (cfg.I.contains(c) || cfg.Iprime.contains(c))
        for (std::int64_t e = 0; e < cfg.model.thickness(); ++e) ones.at(c, e) = 1;
    starts.push_back(ones);
  }
  for (int s = 0; s < seeds; ++s) {
    auto rng = stream(seed, static_cast<std::uint64_t>(s));
    starts.push_back(random_bilinear_spectrum(cfg, rng));
  }
  std::vector<detail::AscentResult> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) { results[i] = detail::ascend(starts[i], value, dir, steps); });
  BilinearEstimate best{cfg, -1, SpectralCoeffs(cfg.model), true};
  for (auto& r : results)
    if (r.value > best.value) {
      best.value = r.value;
      best.witness = r.best;
      best.converged = r.converged;
    }
  return best;
}

// c -> c - a' on coefficients, moving I' to I(0, nu^b); e is unchanged.
inline std::pair<BilinearConfig, SpectralCoeffs> rescale_to_origin(const BilinearConfig& cfg,
                                                                   const SpectralCoeffs& g) {
  const std::int64_t shift = cfg.Iprime.residue;
  const std::int64_t Q = cfg.model.side();
  SpectralCoeffs out(cfg.model);
  for (std::int64_t c = 0; c < Q; ++c)
    for (std::int64_t e = 0; e < cfg.model.thickness(); ++e) out.at(c, e) = g.at(mod(c + shift, Q), e);
  auto moved = BilinearConfig::make(cfg.model, cfg.nu_exp, cfg.a, cfg.b,
                                    Interval::make(cfg.model.q, cfg.I.scale, cfg.I.residue - shift),
                                    Interval::make(cfg.model.q, cfg.Iprime.scale, 0));
  return {moved, out};
}

namespace detail {

inline void require_keystep(const BilinearConfig& cfg) {
  if (cfg.model.M < 2 * cfg.b * cfg.nu_exp) throw InvalidConfig("key step needs delta <= nu^(2b)");
  if (cfg.Iprime.residue != 0) throw InvalidConfig("key step expects I' = I(0, nu^b); rescale first");
}

// Far pairs: d(J, J') > nu^(2b) (q nu)^-1.
inline bool far_pair(const BilinearConfig& cfg, const Interval& J, const Interval& Jp) {
  const Rational thr = qpow(cfg.model.q, -2 * cfg.b * cfg.nu_exp) / qpow(cfg.model.q, 1 - cfg.nu_exp);
  return distance(J, Jp) > thr;
}

inline std::vector<Interval> key_arcs(const BilinearConfig& cfg) {
  return geometry::partition(cfg.I, 2 * cfg.b * cfg.nu_exp);
}

}  // namespace detail

// Cross integrals X(J, J') = sum f_J conj(f_J') |f_I'|^4 over J, J' in P_{nu^2b}(I).
inline ClaimReport verify_keystep_orthogonality(const BilinearConfig& cfg, int trials, std::uint64_t seed = 0) {
  detail::require_keystep(cfg);
  const auto arcs = detail::key_arcs(cfg);
  const std::size_t nJ = arcs.size();
  int multiplicity = 0;
  for (auto& J : arcs) {
    int near = 0;
    for (auto& Jp : arcs) near += !detail::far_pair(cfg, J, Jp);
    multiplicity = std::max(multiplicity, near);
  }
  std::vector<double> offdiag(static_cast<std::size_t>(trials), 0), constant(offdiag.size(), 0),
      cs_excess(offdiag.size(), 0);
  parallel_for(offdiag.size(), [&](std::size_t t) {
    auto rng = stream(seed, t);
    const auto g = random_bilinear_spectrum(cfg, rng);
    const auto v = arc_field(g, cfg.Iprime);
    const auto u = arc_field(g, cfg.I);
    std::vector<double> w(v.data.size());
    for (std::size_t n = 0; n < w.size(); ++n) w[n] = std::pow(std::norm(v.data[n]), 2);
    std::vector<PhysicalField> fJ;
    for (auto& J : arcs) fJ.push_back(arc_field(g, J));
    std::vector<cplx> X(nJ * nJ);
    for (std::size_t a = 0; a < nJ; ++a)
      for (std::size_t b = a; b < nJ; ++b) {
        cplx s = 0;
        for (std::size_t n = 0; n < w.size(); ++n) s += fJ[a].data[n] * std::conj(fJ[b].data[n]) * w[n];
        X[a * nJ + b] = s;
        X[b * nJ + a] = std::conj(s);
      }
    double diag_scale = 0, diag_sum = 0, lhs = 0, near_form = 0;
    for (std::size_t a = 0; a < nJ; ++a) {
      diag_scale = std::max(diag_scale, X[a * nJ + a].real());
      diag_sum += X[a * nJ + a].real();
    }
    for (std::size_t n = 0; n < w.size(); ++n) lhs += std::norm(u.data[n]) * w[n];
    for (std::size_t a = 0; a < nJ; ++a)
      for (std::size_t b = 0; b < nJ; ++b) {
        if (detail::far_pair(cfg, arcs[a], arcs[b]))
          offdiag[t] = std::max(offdiag[t], std::abs(X[a * nJ + b]) / diag_scale);
        else
          near_form += std::abs(X[a * nJ + b]);
      }
    constant[t] = lhs / diag_sum;
    cs_excess[t] = near_form / (multiplicity * diag_sum) - 1;
  });
  ClaimReport r;
  r.claim = "keystep_orthogonality";
  r.anchor = "sum f_J conj(f_J') |f_I'|^4 = 0 when d(J,J') > nu^2b/(q nu)";
  r.config = cfg.to_json();
  r.trials = trials;
  double worst = 0, cmax = 0, csmax = -1;
  for (std::size_t t = 0; t < offdiag.size(); ++t) {
    worst = std::max(worst, offdiag[t]);
    cmax = std::max(cmax, constant[t]);
    csmax = std::max(csmax, cs_excess[t]);
  }
  r.empirical_constant = cmax;
  r.max_violation = std::max({0.0, worst - 1e-8, cmax - multiplicity * (1 + 1e-10), csmax});
  r.passed = worst <= 1e-8 && cmax <= multiplicity * (1 + 1e-10) && csmax <= 1e-10;
  r.details["max_far_cross_over_diagonal"] = worst;
  r.details["near_multiplicity"] = multiplicity;
  r.details["cauchy_schwarz_excess"] = csmax;
  return r;
}

// Model support of f_J: cells (c, c^2 + q^2M e) with c in J.
inline geometry::CellRegion model_support(const ModelParams& p, const Interval& J) {
  const int L = p.L;
  geometry::CellRegion grid(p.q, {0, 0}, {L, L});
  std::vector<std::uint64_t> keys;
  SpectralCoeffs probe(p);
  for (std::int64_t c = J.residue; c < p.side(); c += ipow(p.q, J.scale))
    for (std::int64_t e = 0; e < p.thickness(); ++e) keys.push_back(grid.key(c, probe.eta(c, e)));
  return geometry::CellRegion::from_keys(p.q, {0, 0}, {L, L}, std::move(keys));
}

inline ClaimReport verify_strip_disjointness(const BilinearConfig& cfg, int trials = 50, std::uint64_t seed = 0) {
  detail::require_keystep(cfg);
  const ModelParams& p = cfg.model;
  const int w = 2 * cfg.b * cfg.nu_exp;
  const auto arcs = detail::key_arcs(cfg);
  const auto suppIp = model_support(p, cfg.Iprime);
  std::vector<geometry::CellRegion> strips;
  bool contained = true;
  for (auto& J : arcs) {
    strips.push_back(geometry::strip_region(p.q, J.residue, w, {p.L, p.L}));
    const auto sum = minkowski_sum(minkowski_sum(model_support(p, J), suppIp), suppIp);
    contained = contained && sum.is_subset_of(strips.back());
  }
  bool disjoint = true;
  auto collisions = ojson::array();
  for (std::size_t a = 0; a < arcs.size(); ++a)
    for (std::size_t b = a + 1; b < arcs.size(); ++b)
      if (detail::far_pair(cfg, arcs[a], arcs[b]) && !intersection(strips[a], strips[b]).empty()) {
        disjoint = false;
        collisions.push_back({arcs[a].residue, arcs[b].residue});
      }
  // Numerical leakage of f_J f_I'^2 outside S_J.
  std::vector<double> leak(static_cast<std::size_t>(trials), 0);
  parallel_for(leak.size(), [&](std::size_t t) {
    auto rng = stream(seed, t);
    const auto g = random_bilinear_spectrum(cfg, rng);
    const auto v = arc_field(g, cfg.Iprime);
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      auto h = arc_field(g, arcs[a]);
      for (std::size_t n = 0; n < h.data.size(); ++n) h.data[n] *= v.data[n] * v.data[n];
      const auto H = model::analyze_dense(h);
      double off = 0, total = 0;
      for (std::int64_t c = 0; c < p.side(); ++c)
        for (std::int64_t d = 0; d < p.side(); ++d) {
          const double e = std::norm(H.at(c, d));
          total += e;
          if (!strips[a].contains(c, d)) off += e;
        }
      if (total > 0) leak[t] = std::max(leak[t], std::sqrt(off / total));
    }
  });
  const double worst = *std::max_element(leak.begin(), leak.end());
  ClaimReport r;
  r.claim = "strip_disjointness";
  r.anchor = "supp(f_J f_I'^2)^ lies in {|eta - s_J^2| <= nu^2b}; far strips are disjoint";
  r.config = cfg.to_json();
  r.trials = trials;
  r.max_violation = worst;
  r.passed = contained && disjoint && worst <= 1e-8;
  r.details["exact_containment"] = contained;
  r.details["far_strips_disjoint"] = disjoint;
  r.details["collisions"] = collisions;
  r.details["max_relative_leakage"] = worst;
  return r;
}

inline ClaimReport verify_fixed_x_orthogonality(const BilinearConfig& cfg, int trials, std::uint64_t seed = 0) {
  detail::require_keystep(cfg);
  const ModelParams& p = cfg.model;
  const auto arcs = detail::key_arcs(cfg);
  const std::int64_t Q = p.side(), cls = ipow(p.q, p.L - 2 * cfg.b * cfg.nu_exp);
  int multiplicity = 0;
  for (auto& J : arcs) {
    int near = 0;
    for (auto& Jp : arcs) near += !detail::far_pair(cfg, J, Jp);
    multiplicity = std::max(multiplicity, near);
  }
  std::vector<double> worst(static_cast<std::size_t>(trials), 0);
  parallel_for(worst.size(), [&](std::size_t t) {
    auto rng = stream(seed, t);
    const auto g = random_bilinear_spectrum(cfg, rng);
    const auto u = arc_field(g, cfg.I);
    std::vector<PhysicalField> fJ;
    for (auto& J : arcs) fJ.push_back(arc_field(g, J));
    double scale = 0;
    for (auto& f : fJ) scale = std::max(scale, padec::model::l2_sq(f.data));
    // Column x1 = n1, y ranging over a class of n2 modulo q^(L - 2bn).
    for (std::int64_t n1 = 0; n1 < Q; ++n1)
      for (std::int64_t r0 = 0; r0 < cls; ++r0) {
        double lhs = 0, rhs = 0;
        for (std::int64_t n2 = r0; n2 < Q; n2 += cls) {
          lhs += std::norm(u.at(n1, n2));
          for (auto& f : fJ) rhs += std::norm(f.at(n1, n2));
        }
        if (rhs > 1e-12 * scale) worst[t] = std::max(worst[t], lhs / rhs);
      }
  });
  const double c = *std::max_element(worst.begin(), worst.end());
  ClaimReport r;
  r.claim = "fixed_x_orthogonality";
  r.anchor = "int |f_I(x0,y)|^2 dy <= C sum_J int |f_J(x0,y)|^2 dy on every column";
  r.config = cfg.to_json();
  r.trials = trials;
  r.empirical_constant = c;
  r.max_violation = std::max(0.0, c - multiplicity * (1 + 1e-10));
  r.passed = c <= multiplicity * (1 + 1e-10);
  r.details["near_multiplicity"] = multiplicity;
  return r;
}

// Averages over balls of radius nu^-2b: avg|f_I|^2|f_I'|^4 <= C avg|f_I|^2 avg|f_I'|^4.
inline double ball_inflation_constant(const BilinearConfig& cfg, const SpectralCoeffs& g) {
  const ModelParams& p = cfg.model;
  const std::int64_t Q = p.side(), cls = ipow(p.q, p.L - 2 * cfg.b * cfg.nu_exp);
  const auto u = arc_field(g, cfg.I), v = arc_field(g, cfg.Iprime);
  const std::size_t nb = static_cast<std::size_t>(cls * cls);
  std::vector<double> s12(nb), s1(nb), s2(nb);
  for (std::int64_t n1 = 0; n1 < Q; ++n1)
    for (std::int64_t n2 = 0; n2 < Q; ++n2) {
      const std::size_t b = static_cast<std::size_t>((n1 % cls) * cls + n2 % cls);
      const double a2 = std::norm(u.at(n1, n2)), b4 = std::pow(std::norm(v.at(n1, n2)), 2);
      s12[b] += a2 * b4;
      s1[b] += a2;
      s2[b] += b4;
    }
  const double size = static_cast<double>(p.points()) / static_cast<double>(nb);
  // Balls where either factor is at rounding level carry no information.
  const double m1 = *std::max_element(s1.begin(), s1.end()), m2 = *std::max_element(s2.begin(), s2.end());
  double c = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    if (s1[b] <= 1e-12 * m1 || s2[b] <= 1e-12 * m2) continue;
    const double den = (s1[b] / size) * (s2[b] / size);
    c = std::max(c, (s12[b] / size) / den);
  }
  return c;
}

// |T cap T'| |B| / (|T| |T'|) for tubes of I and I' through the origin.
inline double ball_inflation_prediction(const BilinearConfig& cfg) {
  const int B = 2 * cfg.b * cfg.nu_exp;
  const auto T = geometry::Tube::at_origin(cfg.I, cfg.I.residue);
  const auto U = geometry::Tube::at_origin(cfg.Iprime, cfg.Iprime.residue);
  const Rational cap = geometry::tube_intersection_measure(T, U, B, 0);
  const Rational pred = cap * qpow(cfg.model.q, 2 * B) / (T.measure() * U.measure());
  return static_cast<double>(pred);
}

inline ClaimReport verify_ball_inflation(const BilinearConfig& cfg, int trials, std::uint64_t seed = 0) {
  if (cfg.a != cfg.b) throw InvalidConfig("ball inflation is checked for a = b");
  if (cfg.Iprime.residue != 0) throw InvalidConfig("ball inflation expects I' = I(0, nu^b); rescale first");
  const double pred = ball_inflation_prediction(cfg);
  std::vector<double> cs(static_cast<std::size_t>(trials), 0);
  parallel_for(cs.size(), [&](std::size_t t) {
    auto rng = stream(seed, t);
    cs[t] = ball_inflation_constant(cfg, random_bilinear_spectrum(cfg, rng));
  });
  const double c = *std::max_element(cs.begin(), cs.end());
  ClaimReport r;
  r.claim = "ball_inflation";
  r.anchor = "avg_B |f_I|^2 |f_I'|^4 <= |T cap T'||B|/(|T||T'|) avg_B |f_I|^2 avg_B |f_I'|^4";
  r.config = cfg.to_json();
  r.trials = trials;
  r.empirical_constant = c;
  r.max_violation = std::max(0.0, c - pred * (1 + 1e-9));
  r.passed = c <= pred * (1 + 1e-9);
  r.details["predicted_constant"] = pred;
  r.details["one_over_distance"] = static_cast<double>(1 / geometry::distance(cfg.I, cfg.Iprime));
  return r;
}

inline ClaimReport verify_subinterval_l2(const BilinearConfig& cfg, int trials, std::uint64_t seed = 0) {
  if (cfg.a > cfg.b) throw InvalidConfig("sub-interval step needs a <= b");
  if (cfg.Iprime.residue != 0) throw InvalidConfig("sub-interval step expects I' = I(0, nu^b); rescale first");
  const ModelParams& p = cfg.model;
  const int bn = cfg.b * cfg.nu_exp;
  const auto arcs = geometry::partition(cfg.I, bn);
  bool absorbed = true;
  for (auto& J : arcs) absorbed = absorbed && geometry::arc_absorb_ball(J);
  // theta_J + B(0, nu^b) for distinct J must not meet.
  bool separated = true;
  {
    const geometry::Resolution res{2 * bn, 2 * bn};
    const auto ball = geometry::ball(p.q, {0, 0}, res, 0, 0, -bn);
    std::vector<geometry::CellRegion> fat;
    for (auto& J : arcs) fat.push_back(minkowski_sum(geometry::arc_region(J, res), ball));
    for (std::size_t a = 0; a < fat.size(); ++a)
      for (std::size_t b = a + 1; b < fat.size(); ++b) separated = separated && intersection(fat[a], fat[b]).empty();
  }
  const std::int64_t Q = p.side(), cls = ipow(p.q, p.L - bn);
  std::vector<double> worst(static_cast<std::size_t>(trials), 0);
  parallel_for(worst.size(), [&](std::size_t t) {
    auto rng = stream(seed, t);
    const auto g = random_bilinear_spectrum(cfg, rng);
    const auto u = arc_field(g, cfg.I), v = arc_field(g, cfg.Iprime);
    std::vector<PhysicalField> fJ;
    for (auto& J : arcs) fJ.push_back(arc_field(g, J));
    const std::size_t nb = static_cast<std::size_t>(cls * cls);
    std::vector<double> lhs(nb), rhs(nb);
    double L = 0, R = 0;
    for (std::int64_t n1 = 0; n1 < Q; ++n1)
      for (std::int64_t n2 = 0; n2 < Q; ++n2) {
        const std::size_t b = static_cast<std::size_t>((n1 % cls) * cls + n2 % cls);
        const double w = std::pow(std::norm(v.at(n1, n2)), 2);
        double s = 0;
        for (auto& f : fJ) s += std::norm(f.at(n1, n2));
        lhs[b] += std::norm(u.at(n1, n2)) * w;
        rhs[b] += s * w;
        L += std::norm(u.at(n1, n2)) * w;
        R += s * w;
      }
    worst[t] = R > 0 ? L / R : 0;
    for (std::size_t b = 0; b < nb; ++b)
      if (rhs[b] > 1e-12 * R) worst[t] = std::max(worst[t], lhs[b] / rhs[b]);
  });
  const double c = *std::max_element(worst.begin(), worst.end());
  ClaimReport r;
  r.claim = "subinterval_l2";
  r.anchor = "int |f_I|^2 |f_I'|^4 <= sum_{J in P_nu^b(I)} int |f_J|^2 |f_I'|^4";
  r.config = cfg.to_json();
  r.trials = trials;
  r.empirical_constant = c;
  r.max_violation = std::max(0.0, c - (1 + 1e-10));
  r.passed = absorbed && separated && c <= 1 + 1e-10;
  r.details["absorption_precheck"] = absorbed;
  r.details["fattened_arcs_disjoint"] = separated;
  return r;
}

}  // namespace padec::decoupling
