#pragma once

#include "padec/parallel.hpp"
#include "padec/core.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

namespace padec::expsum {

// (s, t) = (n1 + n2 + n3, n1^2 + n2^2 + n3^2) over triples in [1, N]^3.
template <class W>
struct SolutionTally {
  int N = 0;
  std::unordered_map<std::uint64_t, W> weights;

  std::uint64_t key(std::int64_t s, std::int64_t t) const {
    return static_cast<std::uint64_t>(s) * (3ull * N * N + 1) + static_cast<std::uint64_t>(t);
  }
  std::pair<std::int64_t, std::int64_t> unkey(std::uint64_t k) const {
    const std::uint64_t w = 3ull * N * N + 1;
    return {static_cast<std::int64_t>(k / w), static_cast<std::int64_t>(k % w)};
  }

  W total() const {
    W s{};
    for (auto& [k, v] : weights) s += v;
    return s;
  }
};

inline SolutionTally<std::uint64_t> unit_tally(int N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  SolutionTally<std::uint64_t> T{N, {}};
  for (std::int64_t a = 1; a <= N; ++a)
    for (std::int64_t b = 1; b <= N; ++b)
      for (std::int64_t c = 1; c <= N; ++c) ++T.weights[T.key(a + b + c, a * a + b * b + c * c)];
  return T;
}

// Coefficients are a_1..a_N stored at a[0..N-1].
inline SolutionTally<cplx> weighted_tally(std::span<const cplx> a) {
  const int N = static_cast<int>(a.size());
  if (N < 1) throw std::invalid_argument("empty coefficient sequence");
  SolutionTally<cplx> T{N, {}};
  for (std::int64_t x = 1; x <= N; ++x)
    for (std::int64_t y = 1; y <= N; ++y)
      for (std::int64_t z = 1; z <= N; ++z)
        T.weights[T.key(x + y + z, x * x + y * y + z * z)] += a[x - 1] * a[y - 1] * a[z - 1];
  return T;
}

inline std::uint64_t count_from_tally(const SolutionTally<std::uint64_t>& T) {
  std::uint64_t s = 0;
  for (auto& [k, r] : T.weights) s += r * r;
  return s;
}

namespace detail {

// Largest n1^2 + n2^2 + n3^2 with n_i in [1, N] summing to s.
inline std::int64_t max_square_sum(std::int64_t s, std::int64_t N) {
  if (s - 2 <= N) return 2 + (s - 2) * (s - 2);
  if (s - 1 - N <= N) return 1 + (s - 1 - N) * (s - 1 - N) + N * N;
  return (s - 2 * N) * (s - 2 * N) + 2 * N * N;
}

inline std::int64_t square_sum_base(std::int64_t s) {
  std::int64_t b = s * s / 3;
  if ((b - s) % 2 != 0) --b;
  return b;
}

// Visits each multiset n1 <= n2 <= n3 with sum s as (half-offset of t, multiplicity).
template <class F>
void for_each_multiset(std::int64_t s, std::int64_t N, F f) {
  const std::int64_t base = square_sum_base(s);
  const std::int64_t lo1 = std::max<std::int64_t>(1, s - 2 * N), hi1 = s / 3;
  for (std::int64_t n1 = lo1; n1 <= hi1; ++n1) {
    const std::int64_t rest = s - n1;
    const std::int64_t lo2 = std::max(n1, rest - N), hi2 = rest / 2;
    if (lo2 > hi2) continue;
    std::int64_t n3 = rest - lo2;
    std::int64_t idx = (n1 * n1 + lo2 * lo2 + n3 * n3 - base) / 2;
    for (std::int64_t n2 = lo2; n2 <= hi2; ++n2, --n3) {
      const unsigned mult = (n1 == n2) ? (n2 == n3 ? 1u : 3u) : (n2 == n3 ? 3u : 6u);
      f(idx, mult);
      idx += n2 - n3 + 1;
    }
  }
}

// Flat position of (s, t) among the attainable keys for a given N.
struct DenseIndex {
  std::int64_t N = 0;
  std::vector<std::int64_t> offset;

  explicit DenseIndex(std::int64_t n) : N(n), offset(static_cast<std::size_t>(3 * n + 2), 0) {
    std::int64_t total = 0;
    for (std::int64_t s = 3; s <= 3 * n; ++s) {
      offset[s] = total;
      total += (max_square_sum(s, n) - square_sum_base(s)) / 2 + 1;
    }
    offset[3 * n + 1] = total;
  }
  std::size_t size() const { return static_cast<std::size_t>(offset.back()); }
  std::size_t at(std::int64_t s, std::int64_t t) const {
    return static_cast<std::size_t>(offset[s] + (t - square_sum_base(s)) / 2);
  }
};

inline std::vector<cplx> dense_weighted(std::span<const cplx> a, const DenseIndex& ix) {
  const std::int64_t N = static_cast<std::int64_t>(a.size());
  std::vector<cplx> R(ix.size());
  for (std::int64_t x = 1; x <= N; ++x)
    for (std::int64_t y = 1; y <= N; ++y) {
      const cplx axy = a[x - 1] * a[y - 1];
      for (std::int64_t z = 1; z <= N; ++z) R[ix.at(x + y + z, x * x + y * y + z * z)] += axy * a[z - 1];
    }
  return R;
}

}  // namespace detail

// J(N) = sum_{s,t} r(s,t)^2, one dense table of t per s.
inline std::uint64_t count_vmvt(int N, unsigned workers = worker_count()) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  const std::int64_t n = N;
  std::int64_t width = 1;
  for (std::int64_t s = 3; s <= 3 * n; ++s)
    width = std::max(width, (detail::max_square_sum(s, n) - detail::square_sum_base(s)) / 2 + 1);
  const std::int64_t count = 3 * n - 2;
  workers = static_cast<unsigned>(std::clamp<std::int64_t>(workers, 1, count));
  std::vector<std::uint64_t> partial(workers, 0);
  auto run = [&](unsigned w) {
    std::vector<std::uint32_t> r(static_cast<std::size_t>(width), 0);
    std::uint64_t acc = 0;
    for (std::int64_t s = 3 + w; s <= 3 * n; s += workers) {
      detail::for_each_multiset(s, n, [&](std::int64_t idx, unsigned m) { r[idx] += m; });
      detail::for_each_multiset(s, n, [&](std::int64_t idx, unsigned) {
        const std::uint64_t v = r[idx];
        acc += v * v;
        r[idx] = 0;
      });
    }
    partial[w] = acc;
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  std::uint64_t total = 0;
  for (auto v : partial) total += v;
  return total;
}

// ||sum a_n e(n x + n^2 y)||_6^6 over the torus = sum_{s,t} |R(s,t)|^2.
inline double weighted_sixth_moment(std::span<const cplx> a) {
  if (a.empty()) throw std::invalid_argument("empty coefficient sequence");
  const detail::DenseIndex ix(static_cast<std::int64_t>(a.size()));
  double s = 0;
  for (auto& r : detail::dense_weighted(a, ix)) s += std::norm(r);
  return s;
}

inline double kn_ratio(std::span<const cplx> a) {
  double l2 = 0;
  for (auto& z : a) l2 += std::norm(z);
  if (l2 == 0) throw std::invalid_argument("zero coefficient sequence");
  return std::pow(weighted_sixth_moment(a), 1.0 / 6.0) / std::sqrt(l2);
}

// d W / d conj(a_m) = 3 sum_{n2,n3} R(m + n2 + n3, m^2 + n2^2 + n3^2) conj(a_n2 a_n3).
inline std::vector<cplx> sixth_moment_gradient(std::span<const cplx> a) {
  const std::int64_t N = static_cast<std::int64_t>(a.size());
  const detail::DenseIndex ix(N);
  const auto R = detail::dense_weighted(a, ix);
  std::vector<cplx> g(a.size());
  for (std::int64_t m = 1; m <= N; ++m) {
    cplx acc = 0;
    for (std::int64_t y = 1; y <= N; ++y) {
      const cplx ay = std::conj(a[y - 1]);
      for (std::int64_t z = 1; z <= N; ++z)
        acc += R[ix.at(m + y + z, m * m + y * y + z * z)] * ay * std::conj(a[z - 1]);
    }
    g[m - 1] = 3.0 * acc;
  }
  return g;
}

struct KnEstimate {
  int N = 0;
  double value = 0;
  std::vector<cplx> witness;
  double all_ones_ratio = 0;
  bool converged = true;
};

inline KnEstimate kn_lower(int N, int seeds = 10, int steps = 40, std::uint64_t seed = 0) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  std::vector<std::vector<cplx>> starts{std::vector<cplx>(static_cast<std::size_t>(N), cplx(1, 0))};
  for (int s = 0; s < seeds; ++s) {
    auto rng = stream(seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> g;
    std::vector<cplx> a(static_cast<std::size_t>(N));
    for (auto& z : a) z = {g(rng), g(rng)};
    starts.push_back(std::move(a));
  }
  auto normalize = [](std::vector<cplx>& a) {
    double n = 0;
    for (auto& z : a) n += std::norm(z);
    n = std::sqrt(n);
    for (auto& z : a) z /= n;
  };
  struct Res {
    std::vector<cplx> a;
    double v = 0;
    bool conv = false;
  };
  std::vector<Res> results(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Res r{starts[i], 0, false};
    normalize(r.a);
    r.v = kn_ratio(r.a);
    double t = 0.5;
    for (int it = 0; it < steps; ++it) {
      const double W = weighted_sixth_moment(r.a);
      auto d = sixth_moment_gradient(r.a);
      // log ratio gradient on the unit sphere: dW/6W - a/2.
      double dn = 0;
      for (std::size_t k = 0; k < d.size(); ++k) {
        d[k] = d[k] / (6 * W) - 0.5 * r.a[k];
        dn += std::norm(d[k]);
      }
      dn = std::sqrt(dn);
      if (!(dn > 1e-14)) {
        r.conv = true;
        break;
      }
      bool moved = false;
      for (int tries = 0; tries < 24 && !moved; ++tries, t *= 0.5) {
        auto cand = r.a;
        for (std::size_t k = 0; k < cand.size(); ++k) cand[k] += (t / dn) * d[k];
        normalize(cand);
        const double v = kn_ratio(cand);
        if (v > r.v * (1 + 1e-12)) {
          r.a = std::move(cand);
          r.v = v;
          moved = true;
        }
      }
      if (!moved) {
        r.conv = true;
        break;
      }
      t = std::min(1.0, t * 4);
    }
    results[i] = std::move(r);
  });
  KnEstimate best{N, -1, {}, kn_ratio(starts[0]), true};
  for (auto& r : results)
    if (r.v > best.value) {
      best.value = r.v;
      best.witness = r.a;
      best.converged = r.conv;
    }
  return best;
}

struct CongruenceReport {
  int q = 3;
  int t = 1;
  std::int64_t N = 0;
  std::string modulus;
  std::uint64_t congruence_count = 0;
  std::uint64_t solution_count = 0;
  std::uint64_t mismatches = 0;
  std::string method;
  bool equal = false;
};

using Sextuple = std::array<std::int64_t, 6>;

inline bool is_solution(const Sextuple& n) {
  return n[0] + n[1] + n[2] == n[3] + n[4] + n[5] &&
         n[0] * n[0] + n[1] * n[1] + n[2] * n[2] == n[3] * n[3] + n[4] * n[4] + n[5] * n[5];
}

inline bool is_congruence_solution(int q, int t, const Sextuple& n) {
  __int128 m = 1;
  for (int i = 0; i < 10 * t; ++i) m *= q;
  const __int128 d1 = n[0] + n[1] + n[2] - n[3] - n[4] - n[5];
  const __int128 d2 = static_cast<__int128>(n[0]) * n[0] + static_cast<__int128>(n[1]) * n[1] +
                      static_cast<__int128>(n[2]) * n[2] - static_cast<__int128>(n[3]) * n[3] -
                      static_cast<__int128>(n[4]) * n[4] - static_cast<__int128>(n[5]) * n[5];
  return d1 % m == 0 && d2 % m == 0;
}

// Tuples in [1, q^t]^6 solving the system modulo q^(10t) versus exactly.
inline CongruenceReport verify_congruence_equivalence(int q, int t) {
  require_odd_prime(q);
  if (t < 1) throw InvalidConfig("t must be >= 1");
  const std::int64_t N = ipow(q, t);
  if (N > 200) throw InvalidConfig("q^t must not exceed 200");
  __int128 m = 1;
  for (int i = 0; i < 10 * t; ++i) m *= q;
  auto cmod = [&](__int128 v) { return ((v % m) + m) % m; };
  CongruenceReport r{q, t, N, "", 0, 0, 0, "", false};
  {
    std::string s;
    __int128 v = m;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    r.modulus = s;
  }
  if (N <= 21) {
    r.method = "exhaustive";
    for (std::int64_t x1 = 1; x1 <= N; ++x1)
      for (std::int64_t x2 = 1; x2 <= N; ++x2)
        for (std::int64_t x3 = 1; x3 <= N; ++x3)
          for (std::int64_t y1 = 1; y1 <= N; ++y1)
            for (std::int64_t y2 = 1; y2 <= N; ++y2)
              for (std::int64_t y3 = 1; y3 <= N; ++y3) {
                const __int128 d1 = x1 + x2 + x3 - y1 - y2 - y3;
                const __int128 d2 = x1 * x1 + x2 * x2 + x3 * x3 - y1 * y1 - y2 * y2 - y3 * y3;
                const bool cong = cmod(d1) == 0 && cmod(d2) == 0;
                const bool exact = d1 == 0 && d2 == 0;
                r.congruence_count += cong;
                r.solution_count += exact;
                r.mismatches += cong != exact;
              }
  } else {
    // Congruent pairs are pairs of triples whose keys agree modulo m.
    r.method = "tally";
    const auto T = unit_tally(static_cast<int>(N));
    std::unordered_map<std::uint64_t, std::uint64_t> reduced;
    for (auto& [k, w] : T.weights) {
      auto [s, u] = T.unkey(k);
      const std::uint64_t rk =
          static_cast<std::uint64_t>(cmod(s)) * (3ull * N * N + 1) + static_cast<std::uint64_t>(cmod(u));
      reduced[rk] += w;
    }
    r.solution_count = count_from_tally(T);
    for (auto& [k, w] : reduced) r.congruence_count += w * w;
    r.mismatches = reduced.size() == T.weights.size() ? 0 : T.weights.size() - reduced.size();
  }
  r.equal = r.mismatches == 0 && r.congruence_count == r.solution_count;
  return r;
}

}  // namespace padec::expsum
