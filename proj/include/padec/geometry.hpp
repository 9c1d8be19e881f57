#pragma once

#include "padec/padic.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

namespace padec::geometry {

// I(residue, q^-scale) = residue + q^scale O, a closed ball inside O.
struct Interval {
  int q = 3;
  int scale = 0;
  std::int64_t residue = 0;

  static Interval make(int q, int scale, std::int64_t residue) {
    require_odd_prime(q);
    if (scale < 0) throw std::invalid_argument("interval scale must be >= 0");
    const std::int64_t m = ipow(q, scale);
    return {q, scale, mod(residue, m)};
  }

  Rational length() const { return qpow(q, -scale); }

  bool contains(std::int64_t x) const { return mod(x - residue, ipow(q, scale)) == 0; }

  // The unique interval of the coarser scale containing this one.
  Interval parent(int coarser) const {
    if (coarser > scale) throw std::invalid_argument("parent: scale is finer");
    return make(q, coarser, residue);
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// All intervals of scale `finer` inside I, in increasing residue order.
inline std::vector<Interval> partition(const Interval& I, int finer) {
  if (finer < I.scale) throw std::invalid_argument("partition: scale is coarser than the interval");
  const std::int64_t step = ipow(I.q, I.scale);
  const std::int64_t count = ipow(I.q, finer - I.scale);
  std::vector<Interval> out;
  out.reserve(count);
  for (std::int64_t u = 0; u < count; ++u) out.push_back(Interval::make(I.q, finer, I.residue + u * step));
  std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.residue < b.residue; });
  return out;
}

inline std::vector<Interval> partition_unit(int q, int k) { return partition(Interval::make(q, 0, 0), k); }

enum class Relation { Equal, FirstInsideSecond, SecondInsideFirst, Disjoint };

struct IntervalRelation {
  Relation kind;
  Rational distance;  // q^-v(a1 - a2) when disjoint, 0 otherwise
};

inline IntervalRelation interval_relation(const Interval& a, const Interval& b) {
  if (a.q != b.q) throw std::invalid_argument("mixed primes");
  const int k = std::min(a.scale, b.scale);
  const std::int64_t diff = a.residue - b.residue;
  if (mod(diff, ipow(a.q, k)) != 0) return {Relation::Disjoint, qpow(a.q, -valuation(diff, a.q))};
  if (a.scale == b.scale) return {Relation::Equal, 0};
  return {a.scale > b.scale ? Relation::FirstInsideSecond : Relation::SecondInsideFirst, 0};
}

inline Rational distance(const Interval& a, const Interval& b) { return interval_relation(a, b).distance; }

struct Box {
  int bx = 0, by = 0;
  friend bool operator==(const Box&, const Box&) = default;
};

struct Resolution {
  int r1 = 0, r2 = 0;
  friend bool operator==(const Resolution&, const Resolution&) = default;
};

// Finite union of cells x + q^r1 O x q^r2 O inside q^-bx O x q^-by O.
// Cell (i, j) holds x1 = i q^-bx, x2 = j q^-by modulo the cell.
class CellRegion {
 public:
  CellRegion() = default;

  CellRegion(int q, Box box, Resolution res) : q_(q), box_(box), res_(res) {
    require_odd_prime(q);
    if (box.bx + res.r1 < 0 || box.by + res.r2 < 0)
      throw ResolutionError("cells larger than the box");
    nx_ = ipow(q, box.bx + res.r1);
    ny_ = ipow(q, box.by + res.r2);
    if (nx_ > (std::int64_t(1) << 31) || ny_ > (std::int64_t(1) << 31))
      throw ResourceLimit("cell grid too large");
  }

  static CellRegion from_keys(int q, Box box, Resolution res, std::vector<std::uint64_t> keys) {
    CellRegion r(q, box, res);
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    r.keys_ = std::move(keys);
    return r;
  }

  template <class Pred>
  static CellRegion from_predicate(int q, Box box, Resolution res, Pred pred) {
    CellRegion r(q, box, res);
    if (r.nx_ * r.ny_ > (std::int64_t(1) << 26)) throw ResourceLimit("predicate scan too large");
    for (std::int64_t i = 0; i < r.nx_; ++i)
      for (std::int64_t j = 0; j < r.ny_; ++j)
        if (pred(i, j)) r.keys_.push_back(r.key(i, j));
    return r;
  }

  static CellRegion full(int q, Box box, Resolution res) {
    return from_predicate(q, box, res, [](std::int64_t, std::int64_t) { return true; });
  }

  int q() const { return q_; }
  Box box() const { return box_; }
  Resolution resolution() const { return res_; }
  std::int64_t nx() const { return nx_; }
  std::int64_t ny() const { return ny_; }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }
  const std::vector<std::uint64_t>& keys() const { return keys_; }

  std::uint64_t key(std::int64_t i, std::int64_t j) const {
    return static_cast<std::uint64_t>(mod(i, nx_)) * static_cast<std::uint64_t>(ny_) +
           static_cast<std::uint64_t>(mod(j, ny_));
  }
  std::pair<std::int64_t, std::int64_t> cell(std::uint64_t k) const {
    return {static_cast<std::int64_t>(k / ny_), static_cast<std::int64_t>(k % ny_)};
  }

  bool contains(std::int64_t i, std::int64_t j) const {
    return std::binary_search(keys_.begin(), keys_.end(), key(i, j));
  }

  Rational measure() const { return Rational(size()) * qpow(q_, -(res_.r1 + res_.r2)); }

  std::vector<std::pair<std::int64_t, std::int64_t>> cells() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    out.reserve(keys_.size());
    for (auto k : keys_) out.push_back(cell(k));
    return out;
  }

  CellRegion refine(Resolution finer) const {
    if (finer.r1 < res_.r1 || finer.r2 < res_.r2) throw ResolutionError("refine: coarser resolution");
    CellRegion out(q_, box_, finer);
    const std::int64_t ki = ipow(q_, finer.r1 - res_.r1), kj = ipow(q_, finer.r2 - res_.r2);
    std::vector<std::uint64_t> keys;
    keys.reserve(keys_.size() * ki * kj);
    for (auto k : keys_) {
      auto [i, j] = cell(k);
      for (std::int64_t a = 0; a < ki; ++a)
        for (std::int64_t b = 0; b < kj; ++b) keys.push_back(out.key(i + a * nx_, j + b * ny_));
    }
    return from_keys(q_, box_, finer, std::move(keys));
  }

  CellRegion translate(std::int64_t di, std::int64_t dj) const {
    std::vector<std::uint64_t> keys;
    keys.reserve(keys_.size());
    for (auto k : keys_) {
      auto [i, j] = cell(k);
      keys.push_back(key(i + di, j + dj));
    }
    return from_keys(q_, box_, res_, std::move(keys));
  }

  friend bool operator==(const CellRegion& a, const CellRegion& b) {
    return a.q_ == b.q_ && a.box_ == b.box_ && a.res_ == b.res_ && a.keys_ == b.keys_;
  }

  friend CellRegion intersection(const CellRegion& a, const CellRegion& b) {
    a.check_compatible(b);
    std::vector<std::uint64_t> keys;
    std::set_intersection(a.keys_.begin(), a.keys_.end(), b.keys_.begin(), b.keys_.end(),
                          std::back_inserter(keys));
    CellRegion r(a.q_, a.box_, a.res_);
    r.keys_ = std::move(keys);
    return r;
  }

  friend CellRegion set_union(const CellRegion& a, const CellRegion& b) {
    a.check_compatible(b);
    std::vector<std::uint64_t> keys;
    std::set_union(a.keys_.begin(), a.keys_.end(), b.keys_.begin(), b.keys_.end(), std::back_inserter(keys));
    CellRegion r(a.q_, a.box_, a.res_);
    r.keys_ = std::move(keys);
    return r;
  }

  bool is_subset_of(const CellRegion& b) const {
    check_compatible(b);
    return std::includes(b.keys_.begin(), b.keys_.end(), keys_.begin(), keys_.end());
  }

  // Sumset within the box, which is a group modulo the cells.
  friend CellRegion minkowski_sum(const CellRegion& a, const CellRegion& b) {
    a.check_compatible(b);
    if (a.size() * b.size() > (std::size_t(1) << 28)) throw ResourceLimit("sumset too large");
    std::vector<std::uint64_t> keys;
    keys.reserve(a.size() * b.size());
    for (auto ka : a.keys_) {
      auto [i, j] = a.cell(ka);
      for (auto kb : b.keys_) {
        auto [u, v] = b.cell(kb);
        keys.push_back(a.key(i + u, j + v));
      }
    }
    return from_keys(a.q_, a.box_, a.res_, std::move(keys));
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["q"] = q_;
    j["box"] = {box_.bx, box_.by};
    j["resolution"] = {res_.r1, res_.r2};
    auto arr = nlohmann::ordered_json::array();
    for (auto k : keys_) {
      auto [a, b] = cell(k);
      arr.push_back({a, b});
    }
    j["cells"] = std::move(arr);
    return j;
  }

 private:
  void check_compatible(const CellRegion& b) const {
    if (q_ != b.q_ || !(box_ == b.box_) || !(res_ == b.res_))
      throw ResolutionError("regions live on different cell grids");
  }

  int q_ = 3;
  Box box_;
  Resolution res_;
  std::int64_t nx_ = 1, ny_ = 1;
  std::vector<std::uint64_t> keys_;
};

// Index of the cell containing t on an axis with box exponent b and resolution r.
inline std::int64_t cell_index(const padic::PadicScalar& t, int b, int r) {
  if (!t.is_zero() && t.valuation() < -b) throw ResolutionError("point outside the box");
  return t.shifted(b).residue(b + r);
}

// Closed ball of radius q^e about the cell (ci, cj).
inline CellRegion ball(int q, Box box, Resolution res, std::int64_t ci, std::int64_t cj, int e) {
  CellRegion r(q, box, res);
  if (e < -res.r1 || e < -res.r2) throw ResolutionError("ball smaller than a cell");
  const std::int64_t si = ipow(q, std::max(0, box.bx - e)), sj = ipow(q, std::max(0, box.by - e));
  std::vector<std::uint64_t> keys;
  for (std::int64_t i = mod(ci, si); i < r.nx(); i += si)
    for (std::int64_t j = mod(cj, sj); j < r.ny(); j += sj) keys.push_back(r.key(i, j));
  return CellRegion::from_keys(q, box, res, std::move(keys));
}

namespace detail {
inline void require_frequency_res(const Interval& J, Resolution res, int need) {
  if (res.r1 < need || res.r2 < need)
    throw ResolutionError("resolution below " + std::to_string(need) + " for an arc of scale " +
                          std::to_string(J.scale));
}

// Cells (c, d) with c in J and d = f(c) mod q^m, enumerated without a full scan.
template <class F>
CellRegion fibred(const Interval& J, Resolution res, int m, F f) {
  const int q = J.q;
  CellRegion grid(q, {0, 0}, res);
  const std::int64_t step = ipow(q, J.scale), dm = ipow(q, m);
  std::vector<std::uint64_t> keys;
  for (std::int64_t c = J.residue; c < grid.nx(); c += step) {
    const std::int64_t d0 = mod(f(c), dm);
    for (std::int64_t d = d0; d < grid.ny(); d += dm) keys.push_back(grid.key(c, d));
  }
  return CellRegion::from_keys(q, {0, 0}, res, std::move(keys));
}
}  // namespace detail

// theta_J = {(xi, eta): xi in J, |eta - xi^2| <= |J|^2}.
inline CellRegion arc_region(const Interval& J, Resolution res) {
  detail::require_frequency_res(J, res, 2 * J.scale);
  return detail::fibred(J, res, 2 * J.scale, [](std::int64_t c) { return c * c; });
}

// {|xi - a| <= |J|, |eta - 2 a xi + a^2| <= |J|^2} for an anchor a in J.
inline CellRegion arc_parallelogram(const Interval& J, std::int64_t a, Resolution res) {
  if (!J.contains(a)) throw std::invalid_argument("anchor outside the interval");
  detail::require_frequency_res(J, res, 2 * J.scale);
  const std::int64_t m = ipow(J.q, 2 * J.scale);
  const std::int64_t am = mod(a, m);
  return detail::fibred(J, res, 2 * J.scale, [&](std::int64_t c) {
    return static_cast<std::int64_t>(mod(static_cast<std::int64_t>((__int128)2 * am * mod(c, m) % m) -
                                             static_cast<std::int64_t>((__int128)am * am % m),
                                         m));
  });
}

// tau_J = B((a, a^2), |J|).
inline CellRegion tau_region(const Interval& J, std::int64_t a, Resolution res) {
  if (!J.contains(a)) throw std::invalid_argument("anchor outside the interval");
  detail::require_frequency_res(J, res, J.scale);
  const std::int64_t m = ipow(J.q, J.scale);
  const std::int64_t a2 = static_cast<std::int64_t>((__int128)mod(a, m) * mod(a, m) % m);
  return detail::fibred(J, res, J.scale, [&](std::int64_t) { return a2; });
}

// {|eta - s^2| <= q^-w}.
inline CellRegion strip_region(int q, std::int64_t s, int w, Resolution res) {
  if (res.r2 < w) throw ResolutionError("strip width below resolution");
  return detail::fibred(Interval::make(q, 0, 0), res, w, [&](std::int64_t) {
    const std::int64_t m = ipow(q, w);
    return static_cast<std::int64_t>((__int128)mod(s, m) * mod(s, m) % m);
  });
}

// theta_J + B(0, |J|^2) == theta_J, checked on the grid of side q^-(2k + extra).
inline bool arc_absorb_ball(const Interval& J, int extra = 1) {
  const int R = 2 * J.scale + extra;
  const Resolution res{R, R};
  const CellRegion th = arc_region(J, res);
  const CellRegion b = ball(J.q, {0, 0}, res, 0, 0, -2 * J.scale);
  return minkowski_sum(th, b) == th;
}

// (x1, x2) -> (x1 + a x2, x2).
inline CellRegion shear(const CellRegion& region, const padic::PadicScalar& a) {
  const Box box = region.box();
  const Resolution res = region.resolution();
  const int shift = box.bx - box.by;
  const bool zero = a.is_zero();
  if (zero && a.precision() < res.r1 + box.by) throw PrecisionExhausted("shear coefficient too coarse");
  if (!zero && a.valuation() + shift < 0) throw ResolutionError("sheared region leaves the box");
  if (!zero && a.valuation() + res.r2 < res.r1) throw ResolutionError("shear not cell-exact at this resolution");
  const std::int64_t A = zero ? 0 : a.shifted(shift).residue(box.bx + res.r1);
  std::vector<std::uint64_t> keys;
  keys.reserve(region.size());
  for (auto k : region.keys()) {
    auto [i, j] = region.cell(k);
    const std::int64_t di = static_cast<std::int64_t>((__int128)A * j % region.nx());
    keys.push_back(region.key(i + di, j));
  }
  return CellRegion::from_keys(region.q(), box, res, std::move(keys));
}

// T_{0,K} + offset with T_{0,K} = {|x1 + 2 a x2| <= |K|^-1, |x2| <= |K|^-2}.
struct Tube {
  Interval arc;
  std::int64_t anchor = 0;
  padic::PadicPoint offset;

  static Tube make(const Interval& K, std::int64_t anchor, padic::PadicPoint offset) {
    if (!K.contains(anchor)) throw std::invalid_argument("tube anchor outside its arc");
    return {K, anchor, std::move(offset)};
  }
  static Tube at_origin(const Interval& K, std::int64_t anchor) {
    auto z = padic::PadicScalar::zero(K.q, 64);
    return make(K, anchor, {z, z});
  }

  Rational measure() const { return qpow(arc.q, 3 * arc.scale); }
};

namespace detail {
struct TubeFrame {
  std::int64_t ti, tj, mod_j, mod_i, two_a;
};

inline TubeFrame tube_frame(const Tube& T, int B, int r) {
  const int N = T.arc.scale;
  if (B < 2 * N) throw ResolutionError("box smaller than the tube");
  if (r < -N) throw ResolutionError("cells wider than the tube");
  const std::int64_t mi = ipow(T.arc.q, B - N);
  return {cell_index(T.offset.x1, B, r), cell_index(T.offset.x2, B, r), ipow(T.arc.q, B - 2 * N), mi,
          mod(2 * mod(T.anchor, mi), mi)};
}
}  // namespace detail

inline bool tube_contains(const Tube& T, int B, int r, std::int64_t i, std::int64_t j) {
  const auto f = detail::tube_frame(T, B, r);
  const std::int64_t dj = j - f.tj;
  if (mod(dj, f.mod_j) != 0) return false;
  return mod(i - f.ti + static_cast<std::int64_t>((__int128)f.two_a * mod(dj, f.mod_i) % f.mod_i), f.mod_i) == 0;
}

// Cells of T inside q^-B O x q^-B O at resolution (r, r).
inline CellRegion tube_region(const Tube& T, int B, int r) {
  const auto f = detail::tube_frame(T, B, r);
  CellRegion grid(T.arc.q, {B, B}, {r, r});
  std::vector<std::uint64_t> keys;
  for (std::int64_t j = mod(f.tj, f.mod_j); j < grid.ny(); j += f.mod_j) {
    const std::int64_t dj = mod(j - f.tj, f.mod_i);
    const std::int64_t i0 = mod(f.ti - static_cast<std::int64_t>((__int128)f.two_a * dj % f.mod_i), f.mod_i);
    for (std::int64_t i = i0; i < grid.nx(); i += f.mod_i) keys.push_back(grid.key(i, j));
  }
  return CellRegion::from_keys(T.arc.q, {B, B}, {r, r}, std::move(keys));
}

// Translates of T_{0,K} that partition q^-B O x q^-B O.
struct TubeTiling {
  Interval arc;
  std::int64_t anchor = 0;
  int box_exp = 0;
  int res_exp = 0;
  std::vector<Tube> tubes;

  std::int64_t x2_classes() const { return ipow(arc.q, box_exp - 2 * arc.scale); }

  // Index of the tube containing cell (i, j).
  std::size_t label(std::int64_t i, std::int64_t j) const {
    const std::int64_t mi = ipow(arc.q, box_exp - arc.scale);
    const std::int64_t w = mod(j, x2_classes());
    const std::int64_t s =
        mod(i + static_cast<std::int64_t>((__int128)mod(2 * anchor, mi) * mod(j - w, mi) % mi), mi);
    return static_cast<std::size_t>(s * x2_classes() + w);
  }

  CellRegion region(std::size_t k) const { return tube_region(tubes.at(k), box_exp, res_exp); }

  // Every cell lies in exactly one tube, and that tube is the labelled one.
  bool verify_exact() const {
    CellRegion grid(arc.q, {box_exp, box_exp}, {res_exp, res_exp});
    const std::int64_t total = grid.nx() * grid.ny();
    if (total > (std::int64_t(1) << 26)) throw ResourceLimit("tiling check too large");
    std::vector<std::uint32_t> cover(static_cast<std::size_t>(total), 0);
    for (std::size_t k = 0; k < tubes.size(); ++k) {
      const CellRegion R = region(k);
      if (R.measure() != tubes[k].measure()) return false;
      for (auto key : R.keys()) {
        auto [i, j] = R.cell(key);
        if (label(i, j) != k) return false;
        ++cover[key];
      }
    }
    return std::all_of(cover.begin(), cover.end(), [](std::uint32_t c) { return c == 1; });
  }
};

inline TubeTiling tile_box_by_tubes(const Interval& K, int box_exp, std::optional<int> res_exp = {},
                                    std::optional<std::int64_t> anchor = {}) {
  const int N = K.scale;
  const int r = res_exp.value_or(-N);
  if (box_exp < 2 * N) throw ResolutionError("box must contain a full tube");
  TubeTiling t{K, anchor.value_or(K.residue), box_exp, r, {}};
  if (!K.contains(t.anchor)) throw std::invalid_argument("tube anchor outside its arc");
  const int prec = 2 * box_exp + std::max(r, 0) + 4;
  const std::int64_t ns = ipow(K.q, box_exp - N), nw = t.x2_classes();
  if (ns * nw > (std::int64_t(1) << 22)) throw ResourceLimit("too many tubes");
  t.tubes.reserve(static_cast<std::size_t>(ns * nw));
  for (std::int64_t s = 0; s < ns; ++s)
    for (std::int64_t w = 0; w < nw; ++w) {
      padic::PadicPoint off{padic::PadicScalar::from_integer(K.q, s, prec).shifted(-box_exp),
                            padic::PadicScalar::from_integer(K.q, w, prec).shifted(-box_exp)};
      t.tubes.push_back(Tube::make(K, t.anchor, std::move(off)));
    }
  return t;
}

// |T cap T'| for tubes over distinct arcs of one scale.
inline Rational tube_intersection_measure(const Tube& T, const Tube& U, int B, int r) {
  if (T.arc.scale != U.arc.scale) throw std::invalid_argument("tubes of different scales");
  if (T.arc == U.arc) throw std::invalid_argument("tubes over the same arc");
  return intersection(tube_region(T, B, r), tube_region(U, B, r)).measure();
}

// delta^-2 / d(K, K').
inline Rational tube_intersection_bound(const Interval& K, const Interval& U) {
  return qpow(K.q, 2 * K.scale) / distance(K, U);
}

}  // namespace padec::geometry
