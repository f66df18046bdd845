#pragma once

// Exact arithmetic on Z[1/p], the rationals whose denominator is a power of p,
// viewed inside the p-adic numbers. Every value is stored as num / p^l with the
// pair normalized so that p does not divide num unless l == 0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "treebolic/errors.hpp"

namespace treebolic {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt big_pow(std::int64_t base, std::int64_t exponent) {
  if (exponent < 0) throw DomainError("big_pow: negative exponent");
  return boost::multiprecision::pow(BigInt(base), static_cast<unsigned>(exponent));
}

// Non-negative residue of a modulo m (m > 0).
inline BigInt floor_mod(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

// p-adic valuation; empty for zero (+infinity).
class Valuation {
 public:
  Valuation() = default;
  explicit Valuation(std::int64_t v) : value_(v) {}
  static Valuation infinite() { return Valuation(); }

  bool is_infinite() const { return !value_.has_value(); }
  std::int64_t value() const {
    if (!value_) throw DomainError("valuation of zero is infinite");
    return *value_;
  }
  // |u|_p = p^(-v), and 0 for the zero element.
  double norm(std::int64_t p) const {
    if (!value_) return 0.0;
    return std::pow(static_cast<double>(p), -static_cast<double>(*value_));
  }

  friend bool operator==(const Valuation&, const Valuation&) = default;
  // Ordering with +infinity on top.
  friend bool operator<(const Valuation& a, const Valuation& b) {
    if (a.is_infinite()) return false;
    if (b.is_infinite()) return true;
    return *a.value_ < *b.value_;
  }
  friend bool operator<=(const Valuation& a, const Valuation& b) { return !(b < a); }

 private:
  std::optional<std::int64_t> value_;
};

class PadicRational {
 public:
  PadicRational() = default;  // zero in base 2

  PadicRational(std::int64_t p, BigInt numerator, std::int64_t denom_exp = 0)
      : p_(p), num_(std::move(numerator)), l_(denom_exp) {
    if (p_ < 2) throw DomainError("PadicRational: base must be >= 2");
    if (l_ < 0) {
      num_ *= big_pow(p_, -l_);
      l_ = 0;
    }
    normalize();
  }

  static PadicRational zero(std::int64_t p) { return PadicRational(p, 0); }
  static PadicRational integer(std::int64_t p, std::int64_t n) { return PadicRational(p, BigInt(n)); }
  // p^k for any integer k.
  static PadicRational power(std::int64_t p, std::int64_t k) {
    return k >= 0 ? PadicRational(p, big_pow(p, k)) : PadicRational(p, 1, -k);
  }

  std::int64_t base() const { return p_; }
  const BigInt& numerator() const { return num_; }
  std::int64_t denom_exp() const { return l_; }
  bool is_zero() const { return num_ == 0; }

  Valuation valuation() const {
    if (num_ == 0) return Valuation::infinite();
    std::int64_t v = 0;
    BigInt n = num_;
    const BigInt p(p_);
    while (n % p == 0) {
      n /= p;
      ++v;
    }
    return Valuation(v - l_);
  }

  double norm() const { return valuation().norm(p_); }

  double to_double() const {
    return num_.convert_to<double>() / std::pow(static_cast<double>(p_), static_cast<double>(l_));
  }

  // Multiplication by p^k, exact.
  PadicRational shifted(std::int64_t k) const {
    if (k >= 0) {
      if (k <= l_) return PadicRational(p_, num_, l_ - k);
      return PadicRational(p_, num_ * big_pow(p_, k - l_), 0);
    }
    return PadicRational(p_, num_, l_ - k);
  }

  PadicRational operator-() const { return PadicRational(p_, -num_, l_); }

  friend PadicRational operator+(const PadicRational& a, const PadicRational& b) {
    check_same_base(a, b);
    const std::int64_t l = std::max(a.l_, b.l_);
    BigInt n = a.num_ * big_pow(a.p_, l - a.l_) + b.num_ * big_pow(b.p_, l - b.l_);
    return PadicRational(a.p_, std::move(n), l);
  }
  friend PadicRational operator-(const PadicRational& a, const PadicRational& b) { return a + (-b); }
  friend PadicRational operator*(const PadicRational& a, const PadicRational& b) {
    check_same_base(a, b);
    return PadicRational(a.p_, a.num_ * b.num_, a.l_ + b.l_);
  }
  PadicRational& operator+=(const PadicRational& o) { return *this = *this + o; }
  PadicRational& operator*=(const PadicRational& o) { return *this = *this * o; }

  friend bool operator==(const PadicRational& a, const PadicRational& b) {
    return a.p_ == b.p_ && a.num_ == b.num_ && a.l_ == b.l_;
  }

  // "num/p^l", or just "num" for integers.
  std::string to_string() const {
    std::ostringstream os;
    os << num_;
    if (l_ != 0) os << '/' << p_ << '^' << l_;
    return os.str();
  }
  friend std::ostream& operator<<(std::ostream& os, const PadicRational& u) { return os << u.to_string(); }

 private:
  static void check_same_base(const PadicRational& a, const PadicRational& b) {
    if (a.p_ != b.p_) throw DomainError("PadicRational: mismatched bases");
  }

  void normalize() {
    if (num_ == 0) {
      l_ = 0;
      return;
    }
    const BigInt p(p_);
    while (l_ > 0 && num_ % p == 0) {
      num_ /= p;
      --l_;
    }
  }

  std::int64_t p_ = 2;
  BigInt num_ = 0;
  std::int64_t l_ = 0;
};

// Canonical centre of the closed ball B(u, p^-m): the unique c with
// |u - c|_p <= p^-m whose expansion only uses digits at indices < m.
inline PadicRational canonical_ball_center(const PadicRational& u, std::int64_t m) {
  const std::int64_t p = u.base();
  const std::int64_t scale = std::max({u.denom_exp(), -m, std::int64_t{0}});
  const BigInt scaled = u.numerator() * big_pow(p, scale - u.denom_exp());
  return PadicRational(p, floor_mod(scaled, big_pow(p, scale + m)), scale);
}

// Digits a_k, lo <= k < hi, of the p-adic expansion of u.
inline std::vector<int> digits(const PadicRational& u, std::int64_t lo, std::int64_t hi) {
  if (lo > hi) throw DomainError("digits: lo > hi");
  const std::int64_t p = u.base();
  // (u - low part) * p^-lo is an integer; its residues carry the wanted digits.
  const PadicRational high = (u - canonical_ball_center(u, lo)).shifted(-lo);
  if (high.denom_exp() != 0) throw NumericalFailure("digits: expected integral high part");
  BigInt r = floor_mod(high.numerator(), big_pow(p, hi - lo));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(hi - lo));
  const BigInt bp(p);
  for (std::int64_t k = lo; k < hi; ++k) {
    out.push_back(static_cast<int>(r % bp));
    r /= bp;
  }
  return out;
}

}  // namespace treebolic
