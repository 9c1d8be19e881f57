#pragma once

#include "padec/fft.hpp"
#include "padec/geometry.hpp"

#include <json.hpp>

#include <limits>
#include <random>

namespace padec::model {

using geometry::Interval;

// Physical grid n in (Z/q^L)^2 standing for x = n q^-L; frequencies (c, d) in
// (Z/q^L)^2 paired by e((c n1 + d n2) / q^L). delta = q^-M.
struct ModelParams {
  int q = 3;
  int L = 2;
  int M = 1;

  static ModelParams make(int q, int L, int M) {
    require_odd_prime(q);
    if (L < 2 || L % 2 != 0) throw InvalidConfig("L must be even and >= 2");
    if (M < 1 || 2 * M > L) throw InvalidConfig("M must satisfy 1 <= M <= L/2");
    const std::int64_t Q = ipow(q, L);
    if (Q * Q > (std::int64_t(1) << 23))
      throw ResourceLimit("grid of " + std::to_string(Q) + "^2 points exceeds the resource guard");
    return {q, L, M};
  }
  static ModelParams thin(int q, int L) { return make(q, L, L / 2); }

  std::int64_t side() const { return ipow(q, L); }
  std::int64_t points() const { return side() * side(); }
  std::int64_t thickness() const { return ipow(q, L - 2 * M); }
  std::int64_t coeff_count() const { return side() * thickness(); }
  Rational delta() const { return qpow(q, -M); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

// g(c, e) is the coefficient at (c, c^2 + q^2M e).
struct SpectralCoeffs {
  ModelParams params;
  std::vector<cplx> data;

  explicit SpectralCoeffs(ModelParams p = {}) : params(p), data(static_cast<std::size_t>(p.coeff_count())) {}

  cplx& at(std::int64_t c, std::int64_t e) { return data[c * params.thickness() + e]; }
  const cplx& at(std::int64_t c, std::int64_t e) const { return data[c * params.thickness() + e]; }

  std::int64_t eta(std::int64_t c, std::int64_t e) const {
    const std::int64_t Q = params.side();
    return mod(c * c + ipow(params.q, 2 * params.M) * e, Q);
  }
};

struct PhysicalField {
  ModelParams params;
  std::vector<cplx> data;

  explicit PhysicalField(ModelParams p = {}) : params(p), data(static_cast<std::size_t>(p.points())) {}

  cplx& at(std::int64_t n1, std::int64_t n2) { return data[n1 * params.side() + n2]; }
  const cplx& at(std::int64_t n1, std::int64_t n2) const { return data[n1 * params.side() + n2]; }
};

// Arbitrary frequency data on the full grid.
struct DenseSpectrum {
  ModelParams params;
  std::vector<cplx> data;

  explicit DenseSpectrum(ModelParams p = {}) : params(p), data(static_cast<std::size_t>(p.points())) {}

  cplx& at(std::int64_t c, std::int64_t d) { return data[c * params.side() + d]; }
  const cplx& at(std::int64_t c, std::int64_t d) const { return data[c * params.side() + d]; }
};

inline DenseSpectrum densify(const SpectralCoeffs& g) {
  DenseSpectrum G(g.params);
  for (std::int64_t c = 0; c < g.params.side(); ++c)
    for (std::int64_t e = 0; e < g.params.thickness(); ++e) G.at(c, g.eta(c, e)) = g.at(c, e);
  return G;
}

inline PhysicalField synthesize_dense(const DenseSpectrum& G) {
  PhysicalField f(G.params);
  f.data = G.data;
  RadixQFft(G.params.q, G.params.L).transform2d(f.data, +1);
  return f;
}

inline PhysicalField synthesize(const SpectralCoeffs& g) { return synthesize_dense(densify(g)); }

inline DenseSpectrum analyze_dense(const PhysicalField& f) {
  DenseSpectrum G(f.params);
  G.data = f.data;
  RadixQFft(f.params.q, f.params.L).transform2d(G.data, -1);
  const double s = 1.0 / static_cast<double>(f.params.points());
  for (auto& z : G.data) z *= s;
  return G;
}

inline double l2_sq(const std::vector<cplx>& v) {
  double s = 0;
  for (auto& z : v) s += std::norm(z);
  return s;
}

// Coefficients on the thick parabola; energy elsewhere beyond tol (relative) is an error.
inline SpectralCoeffs analyze(const PhysicalField& f, double tol = 1e-10) {
  DenseSpectrum G = analyze_dense(f);
  SpectralCoeffs g(f.params);
  const double total = l2_sq(G.data);
  for (std::int64_t c = 0; c < f.params.side(); ++c)
    for (std::int64_t e = 0; e < f.params.thickness(); ++e) {
      cplx& z = G.at(c, g.eta(c, e));
      g.at(c, e) = z;
      z = 0;
    }
  const double off = l2_sq(G.data);
  if (off > tol * tol * std::max(total, std::numeric_limits<double>::min()))
    throw SupportViolation("spectrum leaves the thick parabola: relative off-support energy " +
                           std::to_string(std::sqrt(off / total)));
  return g;
}

inline void require_arc_fits(const ModelParams& p, const Interval& J) {
  if (J.q != p.q) throw InvalidConfig("arc and model use different primes");
  if (J.scale > 2 * p.M) throw ResolutionError("arc finer than the model resolves");
}

inline SpectralCoeffs project_arc(const SpectralCoeffs& g, const Interval& J) {
  require_arc_fits(g.params, J);
  SpectralCoeffs out(g.params);
  for (std::int64_t c = 0; c < g.params.side(); ++c)
    if (J.contains(c))
      for (std::int64_t e = 0; e < g.params.thickness(); ++e) out.at(c, e) = g.at(c, e);
  return out;
}

inline PhysicalField project_arc(const PhysicalField& f, const Interval& J) {
  require_arc_fits(f.params, J);
  DenseSpectrum G = analyze_dense(f);
  const std::int64_t Q = f.params.side();
  for (std::int64_t c = 0; c < Q; ++c)
    if (!J.contains(c))
      for (std::int64_t d = 0; d < Q; ++d) G.at(c, d) = 0;
  return synthesize_dense(G);
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ||f||_p with unit cell measure; p = kInfinity gives the max modulus.
inline double lp_norm(const std::vector<cplx>& v, double p) {
  if (!(p >= 1)) throw std::invalid_argument("p must lie in [1, inf]");
  if (std::isinf(p)) {
    double m = 0;
    for (auto& z : v) m = std::max(m, std::abs(z));
    return m;
  }
  double m = 0;
  for (auto& z : v) m = std::max(m, std::abs(z));
  if (m == 0) return 0;
  double s = 0;
  for (auto& z : v) s += std::pow(std::abs(z) / m, p);
  return m * std::pow(s, 1.0 / p);
}

inline double lp_norm(const PhysicalField& f, double p) { return lp_norm(f.data, p); }

inline SpectralCoeffs random_spectrum(const ModelParams& p, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  SpectralCoeffs g(p);
  for (auto& z : g.data) z = {n(rng), n(rng)};
  return g;
}

// Wavepacket decomposition of f_K over the tubes T_{0,K} + t tiling the grid.
struct Wavepacket {
  std::size_t tube = 0;
  std::int64_t cells = 0;
  double modulus = 0;  // mean of |f| over the tube
  double min_modulus = 0;
  double max_modulus = 0;
};

struct WavepacketTable {
  Interval arc;
  geometry::TubeTiling tiling;
  std::vector<std::uint32_t> labels;  // tube index per grid point
  std::vector<Wavepacket> packets;
  double max_relative_deviation = 0;  // (max - min) / max |f| over all tubes
  double energy_mismatch = 0;         // |sum c_T^2 |T| - ||f||_2^2| / ||f||_2^2
  double reassembly_error = 0;
  double ball_constancy = 0;  // same deviation over balls of radius |K|^-1
  bool exact_partition = false;

  PhysicalField packet_field(std::size_t k, const PhysicalField& f) const {
    PhysicalField out(f.params);
    for (std::size_t n = 0; n < f.data.size(); ++n)
      if (labels[n] == k) out.data[n] = f.data[n];
    return out;
  }
};

inline double off_arc_fraction(const PhysicalField& f, const Interval& K) {
  const DenseSpectrum G = analyze_dense(f);
  const std::int64_t Q = f.params.side(), m2 = ipow(f.params.q, 2 * K.scale);
  double off = 0, total = 0;
  for (std::int64_t c = 0; c < Q; ++c)
    for (std::int64_t d = 0; d < Q; ++d) {
      const double w = std::norm(G.at(c, d));
      total += w;
      if (!K.contains(c) || mod(d - c * c, m2) != 0) off += w;
    }
  return total > 0 ? std::sqrt(off / total) : 0.0;
}

inline WavepacketTable wavepacket_decompose(const PhysicalField& f, const Interval& K, double support_tol = 1e-10) {
  const ModelParams& p = f.params;
  require_arc_fits(p, K);
  if (K.scale > p.M) throw ResolutionError("arc narrower than delta: the thickness exceeds |K|^2");
  const double leak = off_arc_fraction(f, K);
  if (leak > support_tol)
    throw SupportViolation("field not supported on theta_K: relative leakage " + std::to_string(leak));

  const std::int64_t Q = p.side();
  WavepacketTable t{K, geometry::tile_box_by_tubes(K, p.L, 0), {}, {}, 0, 0, 0, 0, false};
  t.labels.resize(static_cast<std::size_t>(p.points()));
  t.packets.resize(t.tiling.tubes.size());
  for (std::size_t k = 0; k < t.packets.size(); ++k) {
    t.packets[k].tube = k;
    t.packets[k].min_modulus = kInfinity;
  }
  // Membership is checked against the tube predicate, not only the label arithmetic.
  bool consistent = true;
  for (std::int64_t n1 = 0; n1 < Q; ++n1)
    for (std::int64_t n2 = 0; n2 < Q; ++n2) {
      const std::size_t k = t.tiling.label(n1, n2);
      consistent = consistent && geometry::tube_contains(t.tiling.tubes[k], p.L, 0, n1, n2);
      t.labels[n1 * Q + n2] = static_cast<std::uint32_t>(k);
      auto& w = t.packets[k];
      const double a = std::abs(f.at(n1, n2));
      ++w.cells;
      w.modulus += a;
      w.min_modulus = std::min(w.min_modulus, a);
      w.max_modulus = std::max(w.max_modulus, a);
    }
  const std::int64_t tube_cells = ipow(p.q, 3 * K.scale);
  bool sizes = true;
  double gmax = 0, energy = 0;
  for (auto& w : t.packets) {
    sizes = sizes && w.cells == tube_cells;
    w.modulus /= static_cast<double>(w.cells);
    gmax = std::max(gmax, w.max_modulus);
    energy += w.modulus * w.modulus * static_cast<double>(w.cells);
  }
  t.exact_partition = consistent && sizes;
  for (auto& w : t.packets)
    if (gmax > 0) t.max_relative_deviation = std::max(t.max_relative_deviation, (w.max_modulus - w.min_modulus) / gmax);
  const double norm2 = l2_sq(f.data);
  t.energy_mismatch = norm2 > 0 ? std::abs(energy - norm2) / norm2 : 0.0;

  PhysicalField sum(p);
  for (std::size_t k = 0; k < t.packets.size(); ++k) {
    auto piece = t.packet_field(k, f);
    for (std::size_t n = 0; n < sum.data.size(); ++n) sum.data[n] += piece.data[n];
  }
  double err = 0;
  for (std::size_t n = 0; n < sum.data.size(); ++n) err = std::max(err, std::abs(sum.data[n] - f.data[n]));
  t.reassembly_error = gmax > 0 ? err / gmax : err;

  // Balls of radius |K|^-1 are the classes of n modulo q^(L - k).
  const std::int64_t bm = ipow(p.q, p.L - K.scale);
  std::vector<double> lo(static_cast<std::size_t>(bm * bm), kInfinity), hi(static_cast<std::size_t>(bm * bm), 0);
  for (std::int64_t n1 = 0; n1 < Q; ++n1)
    for (std::int64_t n2 = 0; n2 < Q; ++n2) {
      const std::size_t b = static_cast<std::size_t>((n1 % bm) * bm + n2 % bm);
      const double a = std::abs(f.at(n1, n2));
      lo[b] = std::min(lo[b], a);
      hi[b] = std::max(hi[b], a);
    }
  for (std::size_t b = 0; b < lo.size(); ++b)
    if (gmax > 0) t.ball_constancy = std::max(t.ball_constancy, (hi[b] - lo[b]) / gmax);
  return t;
}

struct IndicatorReport {
  double ball_deviation = 0;  // max |FT(1_B(0,q^k)) - q^2k 1_B(0,q^-k)| over k, both axes
  double tube_deviation = 0;  // max over arcs K with |K| >= q^-L/2
  int arcs_checked = 0;
};

inline IndicatorReport verify_indicator_transform(int q, int L) {
  const ModelParams p = ModelParams::make(q, L, 1);
  const std::int64_t Q = p.side();
  IndicatorReport r;
  for (int k = 0; k <= L; ++k) {
    PhysicalField ind(p);
    const std::int64_t step = ipow(q, L - k);
    for (std::int64_t n1 = 0; n1 < Q; n1 += step)
      for (std::int64_t n2 = 0; n2 < Q; n2 += step) ind.at(n1, n2) = 1;
    DenseSpectrum G = analyze_dense(ind);
    const double scale = static_cast<double>(p.points());  // undo the 1/Q^2 of analysis
    const std::int64_t fm = ipow(q, k);
    const double mass = static_cast<double>(fm * fm);
    for (std::int64_t c = 0; c < Q; ++c)
      for (std::int64_t d = 0; d < Q; ++d) {
        const double expect = (c % fm == 0 && d % fm == 0) ? mass : 0.0;
        r.ball_deviation = std::max(r.ball_deviation, std::abs(G.at(c, d) * scale - expect));
      }
  }
  for (int m = 0; m <= L / 2; ++m)
    for (const auto& K : geometry::partition_unit(q, m)) {
      DenseSpectrum G(p);
      const std::int64_t m2 = ipow(q, 2 * m);
      for (std::int64_t c = K.residue; c < Q; c += ipow(q, m))
        for (std::int64_t d = mod(c * c, m2); d < Q; d += m2) G.at(c, d) = 1;
      const PhysicalField f = synthesize_dense(G);
      const double norm = std::pow(static_cast<double>(q), -2.0 * L);
      const double amp = std::pow(static_cast<double>(q), -3.0 * m);
      const auto T = geometry::Tube::at_origin(K, K.residue);
      const std::int64_t a = K.residue;
      for (std::int64_t n1 = 0; n1 < Q; ++n1)
        for (std::int64_t n2 = 0; n2 < Q; ++n2) {
          cplx expect = 0;
          if (geometry::tube_contains(T, L, 0, n1, n2)) {
            const std::int64_t ph = mod(a * n1 + mod(a * a, Q) * n2, Q);
            expect = std::polar(amp, 2.0 * std::numbers::pi * static_cast<double>(ph) / static_cast<double>(Q));
          }
          r.tube_deviation = std::max(r.tube_deviation, std::abs(f.at(n1, n2) * norm - expect));
        }
      ++r.arcs_checked;
    }
  return r;
}

inline nlohmann::ordered_json to_json(const SpectralCoeffs& g) {
  nlohmann::ordered_json j;
  j["kind"] = "spectral_coeffs";
  j["q"] = g.params.q;
  j["L"] = g.params.L;
  j["M"] = g.params.M;
  auto arr = nlohmann::ordered_json::array();
  for (auto& z : g.data) arr.push_back({z.real(), z.imag()});
  j["coeffs"] = std::move(arr);
  return j;
}

inline SpectralCoeffs spectral_from_json(const nlohmann::json& j) {
  SpectralCoeffs g(ModelParams::make(j.at("q"), j.at("L"), j.at("M")));
  const auto& arr = j.at("coeffs");
  if (arr.size() != g.data.size()) throw std::invalid_argument("coefficient count mismatch");
  for (std::size_t k = 0; k < g.data.size(); ++k) g.data[k] = {arr[k][0].get<double>(), arr[k][1].get<double>()};
  return g;
}

inline nlohmann::ordered_json to_json(const PhysicalField& f) {
  nlohmann::ordered_json j;
  j["kind"] = "physical_field";
  j["q"] = f.params.q;
  j["L"] = f.params.L;
  j["M"] = f.params.M;
  auto arr = nlohmann::ordered_json::array();
  for (auto& z : f.data) arr.push_back({z.real(), z.imag()});
  j["values"] = std::move(arr);
  return j;
}

}  // namespace padec::model
