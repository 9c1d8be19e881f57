#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace padec {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using cplx = std::complex<double>;

struct InvalidConfig : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct PrecisionExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResolutionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct SupportViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_odd_prime(std::int64_t n) {
  if (n < 3 || n % 2 == 0) return false;
  for (std::int64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0) return false;
  return true;
}

inline void require_odd_prime(std::int64_t q) {
  if (!is_odd_prime(q))
    throw InvalidConfig("q must be an odd prime (got " + std::to_string(q) + ")");
}

// q^e for e >= 0, guarded against int64 overflow.
inline std::int64_t ipow(std::int64_t q, int e) {
  if (e < 0) throw std::invalid_argument("ipow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > INT64_MAX / q) throw ResourceLimit("q^" + std::to_string(e) + " overflows int64");
    r *= q;
  }
  return r;
}

// Nonnegative residue of n modulo m.
inline std::int64_t mod(std::int64_t n, std::int64_t m) {
  std::int64_t r = n % m;
  return r < 0 ? r + m : r;
}

// q-adic valuation of a nonzero integer.
inline int valuation(std::int64_t n, std::int64_t q) {
  if (n == 0) throw std::invalid_argument("valuation of zero");
  int v = 0;
  while (n % q == 0) {
    n /= q;
    ++v;
  }
  return v;
}

// q^e as an exact rational, e of any sign.
inline Rational qpow(std::int64_t q, int e) {
  BigInt p = 1;
  for (int i = 0; i < (e < 0 ? -e : e); ++i) p *= q;
  return e >= 0 ? Rational(p) : Rational(BigInt(1), p);
}

inline std::string to_string(const Rational& r) {
  return r.str();
}

}  // namespace padec
