#pragma once

#include "padec/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <vector>

namespace padec::padic {

// Element of Q_q known modulo q^precision. Nonzero values keep a canonical
// leading digit at exponent lo; zero carries only its precision.
class PadicScalar {
 public:
  PadicScalar() = default;

  static PadicScalar zero(int q, int precision) {
    require_odd_prime(q);
    PadicScalar z;
    z.q_ = q;
    z.lo_ = precision;
    z.hi_ = precision;
    return z;
  }

  // digits[k] is the coefficient of q^(lo + k); the window is [lo, lo + digits.size()).
  static PadicScalar from_digits(int q, int lo, std::vector<int> digits) {
    require_odd_prime(q);
    for (int d : digits)
      if (d < 0 || d >= q) throw std::invalid_argument("digit out of range");
    PadicScalar x;
    x.q_ = q;
    x.lo_ = lo;
    x.hi_ = lo + static_cast<int>(digits.size());
    x.digits_ = std::move(digits);
    x.canonicalize();
    return x;
  }

  static PadicScalar from_integer(int q, std::int64_t value, int precision);

  int q() const { return q_; }
  bool is_zero() const { return digits_.empty(); }
  int precision() const { return hi_; }

  int valuation() const {
    if (is_zero()) throw PrecisionExhausted("valuation of a value indistinguishable from zero");
    return lo_;
  }

  // Coefficient of q^e; exponents below the valuation are zero.
  int digit(int e) const {
    if (e >= hi_) throw PrecisionExhausted("digit q^" + std::to_string(e) + " beyond precision " +
                                           std::to_string(hi_));
    if (e < lo_) return 0;
    return digits_[e - lo_];
  }

  const std::vector<int>& digits() const { return digits_; }

  Rational norm() const { return is_zero() ? Rational(0) : qpow(q_, -lo_); }

  // Same value with a smaller window; widening is impossible.
  PadicScalar with_precision(int hi) const {
    if (hi > hi_)
      throw PrecisionExhausted("requested precision " + std::to_string(hi) + " exceeds " +
                               std::to_string(hi_));
    if (hi <= lo_) return zero(q_, hi);
    std::vector<int> d(digits_.begin(), digits_.begin() + (hi - lo_));
    return from_digits(q_, lo_, std::move(d));
  }

  // Multiplication by q^k.
  PadicScalar shifted(int k) const {
    PadicScalar r = *this;
    r.lo_ += k;
    r.hi_ += k;
    return r;
  }

  // Sum of d_e q^(e - from) for e in [from, to): the integer the digits spell
  // after scaling by q^-from. Requires precision >= to.
  std::int64_t window_integer(int from, int to) const {
    if (to > hi_) throw PrecisionExhausted("window beyond precision");
    std::int64_t r = 0;
    for (int e = to - 1; e >= from; --e) r = r * q_ + digit(e);
    return r;
  }

  // x mod q^k for x in O.
  std::int64_t residue(int k) const {
    if (!is_zero() && lo_ < 0) throw std::domain_error("residue of a non-integral value");
    return window_integer(0, k);
  }

  friend PadicScalar operator+(const PadicScalar& x, const PadicScalar& y) {
    check_same(x, y);
    const int hi = std::min(x.hi_, y.hi_);
    const int lo = std::min(x.lo_, y.lo_);
    if (lo >= hi) return zero(x.q_, hi);
    std::vector<int> d(hi - lo);
    int carry = 0;
    for (int e = lo; e < hi; ++e) {
      int s = x.raw(e) + y.raw(e) + carry;
      carry = s >= x.q_;
      d[e - lo] = carry ? s - x.q_ : s;
    }
    return from_digits(x.q_, lo, std::move(d));
  }

  PadicScalar operator-() const {
    if (is_zero()) return *this;
    // -x: complement digits, then add one at the leading place.
    std::vector<int> d(digits_.size());
    d[0] = q_ - digits_[0];
    for (size_t k = 1; k < digits_.size(); ++k) d[k] = q_ - 1 - digits_[k];
    return from_digits(q_, lo_, std::move(d));
  }

  friend PadicScalar operator-(const PadicScalar& x, const PadicScalar& y) { return x + (-y); }

  friend PadicScalar operator*(const PadicScalar& x, const PadicScalar& y) {
    check_same(x, y);
    if (x.is_zero() || y.is_zero()) {
      const int px = x.is_zero() ? x.hi_ : x.lo_;
      const int py = y.is_zero() ? y.hi_ : y.lo_;
      return zero(x.q_, px + py);
    }
    const int rel = std::min(x.hi_ - x.lo_, y.hi_ - y.lo_);
    std::vector<std::int64_t> acc(rel, 0);
    for (int i = 0; i < rel; ++i) {
      if (x.digits_[i] == 0) continue;
      for (int j = 0; i + j < rel; ++j) acc[i + j] += std::int64_t(x.digits_[i]) * y.digits_[j];
    }
    std::vector<int> d(rel);
    std::int64_t carry = 0;
    for (int k = 0; k < rel; ++k) {
      std::int64_t s = acc[k] + carry;
      d[k] = static_cast<int>(s % x.q_);
      carry = s / x.q_;
    }
    return from_digits(x.q_, x.lo_ + y.lo_, std::move(d));
  }

  // Equality of the represented classes on the common window.
  friend bool congruent(const PadicScalar& x, const PadicScalar& y) { return (x - y).is_zero(); }

  friend bool operator==(const PadicScalar& x, const PadicScalar& y) {
    return x.q_ == y.q_ && x.lo_ == y.lo_ && x.hi_ == y.hi_ && x.digits_ == y.digits_;
  }

  friend std::ostream& operator<<(std::ostream& os, const PadicScalar& x) {
    if (x.is_zero()) return os << "O(" << x.q_ << "^" << x.hi_ << ")";
    os << x.q_ << "^" << x.lo_ << "*[";
    for (size_t k = 0; k < x.digits_.size(); ++k) os << (k ? " " : "") << x.digits_[k];
    return os << "]+O(" << x.q_ << "^" << x.hi_ << ")";
  }

 private:
  int raw(int e) const { return (e < lo_ || e >= hi_ || is_zero()) ? 0 : digits_[e - lo_]; }

  static void check_same(const PadicScalar& x, const PadicScalar& y) {
    if (x.q_ != y.q_) throw std::invalid_argument("mixed primes");
  }

  void canonicalize() {
    size_t k = 0;
    while (k < digits_.size() && digits_[k] == 0) ++k;
    if (k == digits_.size()) {
      digits_.clear();
      lo_ = hi_;
      return;
    }
    digits_.erase(digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(k));
    lo_ += static_cast<int>(k);
  }

  int q_ = 3;
  int lo_ = 0;
  int hi_ = 0;
  std::vector<int> digits_;
};

// b/c in Q_q, known modulo q^precision.
inline PadicScalar embed_rational(int q, std::int64_t b, std::int64_t c, int precision) {
  require_odd_prime(q);
  if (c == 0) throw std::invalid_argument("embed_rational: zero denominator");
  if (b == 0) return PadicScalar::zero(q, precision);
  const int vb = valuation(b, q), vc = valuation(c, q);
  for (int i = 0; i < vb; ++i) b /= q;
  for (int i = 0; i < vc; ++i) c /= q;
  const int v = vb - vc;
  if (v >= precision) return PadicScalar::zero(q, precision);
  std::int64_t cinv = 1;
  for (std::int64_t t = 1; t < q; ++t)
    if (mod(mod(c, q) * t, q) == 1) cinv = t;
  std::vector<int> d(precision - v);
  __int128 r = b;
  for (auto& digit : d) {
    std::int64_t rm = static_cast<std::int64_t>(((r % q) + q) % q);
    digit = static_cast<int>(mod(rm * cinv, q));
    r = (r - __int128(digit) * c) / q;
  }
  return PadicScalar::from_digits(q, v, std::move(d));
}

inline PadicScalar PadicScalar::from_integer(int q, std::int64_t value, int precision) {
  return embed_rational(q, value, 1, precision);
}

struct PadicPoint {
  PadicScalar x1, x2;

  Rational norm() const { return std::max(x1.norm(), x2.norm()); }

  friend PadicPoint operator+(const PadicPoint& a, const PadicPoint& b) {
    return {a.x1 + b.x1, a.x2 + b.x2};
  }
  friend PadicPoint operator-(const PadicPoint& a, const PadicPoint& b) {
    return {a.x1 - b.x1, a.x2 - b.x2};
  }
};

// e(x) = exp(2 pi i {x}) where {x} collects the digits at negative exponents.
inline cplx character(const PadicScalar& x) {
  if (x.precision() < 0)
    throw PrecisionExhausted("fractional part of x is not determined at precision " +
                             std::to_string(x.precision()));
  if (x.is_zero() || x.valuation() >= 0) return {1.0, 0.0};
  double acc = 0.0;
  for (int e = x.valuation(); e < 0; ++e) acc = (acc + x.digit(e)) / x.q();
  const double ang = 2.0 * std::numbers::pi * acc;
  return {std::cos(ang), std::sin(ang)};
}

// {x} as an exact rational.
inline Rational fractional_part(const PadicScalar& x) {
  if (x.precision() < 0) throw PrecisionExhausted("fractional part undetermined");
  if (x.is_zero() || x.valuation() >= 0) return 0;
  Rational acc = 0;
  for (int e = x.valuation(); e < 0; ++e) acc = (acc + x.digit(e)) / x.q();
  return acc;
}

}  // namespace padec::padic
