#pragma once

#include "padec/core.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace padec {

// Radix-q Cooley-Tukey transform of length q^levels:
// out[k] = sum_n in[n] e(sign n k / q^levels).
class RadixQFft {
 public:
  RadixQFft(int q, int levels) : q_(q), levels_(levels) {
    if (q < 2 || levels < 0) throw std::invalid_argument("RadixQFft: bad shape");
    n_ = ipow(q, levels);
    if (n_ > (std::int64_t(1) << 26)) throw ResourceLimit("transform length too large");
    roots_.resize(n_);
    for (std::int64_t j = 0; j < n_; ++j) {
      const double ang = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
      roots_[j] = {std::cos(ang), std::sin(ang)};
    }
    perm_.resize(n_);
    for (std::int64_t i = 0; i < n_; ++i) {
      std::int64_t x = i, r = 0;
      for (int l = 0; l < levels; ++l) {
        r = r * q + x % q;
        x /= q;
      }
      perm_[i] = r;
    }
  }

  std::int64_t size() const { return n_; }
  int q() const { return q_; }

  void transform(std::span<cplx> data, int sign) const {
    if (static_cast<std::int64_t>(data.size()) != n_) throw std::invalid_argument("RadixQFft: length mismatch");
    for (std::int64_t i = 0; i < n_; ++i)
      if (perm_[i] > i) std::swap(data[i], data[perm_[i]]);
    std::vector<cplx> x(q_), y(q_), small(static_cast<std::size_t>(q_));
    for (int t = 0; t < q_; ++t) small[t] = root(sign, (n_ / q_) * t);
    std::int64_t sub = 1;
    for (int s = 0; s < levels_; ++s) {
      const std::int64_t m = sub * q_;
      const std::int64_t stride = n_ / m;  // roots_[stride * t] = e(t / m)
      for (std::int64_t start = 0; start < n_; start += m)
        for (std::int64_t k = 0; k < sub; ++k) {
          cplx* base = data.data() + start + k;
          x[0] = base[0];
          for (int r = 1; r < q_; ++r) x[r] = base[r * sub] * root(sign, stride * r * k);
          for (int u = 0; u < q_; ++u) {
            cplx acc = x[0];
            int t = u;
            for (int r = 1; r < q_; ++r, t = (t + u) % q_) acc += x[r] * small[t];
            y[u] = acc;
          }
          for (int u = 0; u < q_; ++u) base[u * sub] = y[u];
        }
      sub = m;
    }
  }

  // Row-major n x n array, both axes.
  void transform2d(std::span<cplx> data, int sign) const {
    if (static_cast<std::int64_t>(data.size()) != n_ * n_) throw std::invalid_argument("RadixQFft: 2d length");
    for (std::int64_t r = 0; r < n_; ++r) transform(data.subspan(r * n_, n_), sign);
    std::vector<cplx> col(n_);
    for (std::int64_t c = 0; c < n_; ++c) {
      for (std::int64_t r = 0; r < n_; ++r) col[r] = data[r * n_ + c];
      transform(col, sign);
      for (std::int64_t r = 0; r < n_; ++r) data[r * n_ + c] = col[r];
    }
  }

 private:
  cplx root(int sign, std::int64_t t) const {
    const cplx w = roots_[t];
    return sign >= 0 ? w : std::conj(w);
  }

  int q_;
  int levels_;
  std::int64_t n_;
  std::vector<cplx> roots_;
  std::vector<std::int64_t> perm_;
};

// Length must be a power of q.
inline void fft_radix_q(std::vector<cplx>& data, int q, int sign) {
  int levels = 0;
  std::int64_t n = 1;
  while (n < static_cast<std::int64_t>(data.size())) {
    n *= q;
    ++levels;
  }
  if (n != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("length " + std::to_string(data.size()) + " is not a power of " + std::to_string(q));
  RadixQFft(q, levels).transform(data, sign);
}

}  // namespace padec
