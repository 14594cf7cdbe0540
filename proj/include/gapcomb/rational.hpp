#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "gapcomb/errors.hpp"
#include "gapcomb/numeric.hpp"

namespace gapcomb {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational scalar.  Always in lowest terms with positive denominator;
// all atom positions, shifts and interval endpoints live here so that the
// placement geometry is decided without tolerances.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(BigInt n) : num_(std::move(n)), den_(1) {}
  Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }
  Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

  // 2^e for any integer e (negative exponents give dyadic fractions).
  static Rational pow2(long e) {
    Rational r(1);
    if (e >= 0) {
      r.num_ = BigInt(1) << e;
    } else {
      r.den_ = BigInt(1) << (-e);
    }
    return r;
  }

  // Exact value of an IEEE double (doubles are dyadic rationals).
  static Rational from_double(double x) {
    if (!std::isfinite(x)) throw ParseError("from_double: non-finite value");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, |mant| in [0.5,1)
    const auto scaled = static_cast<long long>(std::ldexp(mant, 53));
    return Rational(scaled) * pow2(exp - 53);
  }

  // Accepts "num/den", "num", or decimal strings like "-12.5".
  static Rational parse(std::string_view s);

  const BigInt& numerator() const { return num_; }
  const BigInt& denominator() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_ == 0 ? 0 : (num_ > 0 ? 1 : -1); }

  Rational operator-() const { return Rational(-num_, den_, raw_tag{}); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num_ * b.num_, a.den_ * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("Rational: division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const BigInt lhs = a.num_ * b.den_;
    const BigInt rhs = b.num_ * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

  // Largest integer <= *this.
  BigInt floor() const {
    BigInt q = num_ / den_;
    if (num_ < 0 && q * den_ != num_) --q;
    return q;
  }
  // Smallest integer >= *this.
  BigInt ceil() const {
    BigInt q = num_ / den_;
    if (num_ > 0 && q * den_ != num_) ++q;
    return q;
  }
  // Fractional part in [0, 1).
  Rational frac() const { return *this - Rational(floor()); }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  double to_double() const {
    namespace mp = boost::multiprecision;
    const mp::cpp_rational q(num_, den_);
    return q.convert_to<double>();
  }

  // "num/den" (or "num" for integers); round-trips exactly through parse().
  std::string str() const {
    std::string s = num_.str();
    if (den_ != 1) {
      s += '/';
      s += den_.str();
    }
    return s;
  }

 private:
  struct raw_tag {};
  Rational(BigInt num, BigInt den, raw_tag) : num_(std::move(num)), den_(std::move(den)) {}

  void normalize() {
    if (den_ == 0) throw Error("Rational: zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    if (num_ == 0) {
      den_ = 1;
      return;
    }
    const BigInt g = boost::multiprecision::gcd(num_ < 0 ? BigInt(-num_) : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  BigInt num_;
  BigInt den_;  // > 0
};

inline Rational Rational::parse(std::string_view s) {
  auto fail = [&] { throw ParseError("Rational::parse: bad input '" + std::string(s) + "'"); };
  if (s.empty()) fail();
  const auto slash = s.find('/');
  try {
    if (slash != std::string_view::npos) {
      const BigInt num(std::string(s.substr(0, slash)));
      const BigInt den(std::string(s.substr(slash + 1)));
      return Rational(num, den);
    }
    const auto dot = s.find('.');
    if (dot == std::string_view::npos) return Rational(BigInt(std::string(s)));
    // decimal: sign, integer part, fractional digits
    std::string digits(s.substr(0, dot));
    std::string fracpart(s.substr(dot + 1));
    if (fracpart.find_first_not_of("0123456789") != std::string::npos) fail();
    BigInt den = 1;
    for (std::size_t i = 0; i < fracpart.size(); ++i) den *= 10;
    const bool neg = !digits.empty() && digits[0] == '-';
    if (neg) digits.erase(0, 1);
    if (!digits.empty() && digits[0] == '+') digits.erase(0, 1);
    const BigInt ip = digits.empty() ? BigInt(0) : BigInt(digits);
    const BigInt fp = fracpart.empty() ? BigInt(0) : BigInt(fracpart);
    BigInt num = ip * den + fp;
    if (neg) num = -num;
    return Rational(num, den);
  } catch (const std::exception&) {
    fail();
  }
  return Rational();  // unreachable
}

inline Rational abs(const Rational& r) { return r.abs(); }
inline Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a > b ? a : b; }

// e^{-2 pi i x} with the angle reduced exactly mod 1 before any float enters.
// Quarter-phase values are returned bit-exactly so that |e^{-pi i} - 1| = 2
// holds with no rounding at the blow-up probes.
inline Complex cis_neg2pi(const Rational& x) {
  const Rational f = x.frac();
  if (f.is_zero()) return {1.0, 0.0};
  const BigInt four_f = (f * Rational(4)).numerator();
  if ((f * Rational(4)).is_integer()) {
    if (four_f == 1) return {0.0, -1.0};
    if (four_f == 2) return {-1.0, 0.0};
    if (four_f == 3) return {0.0, 1.0};
  }
  const double ang = -6.283185307179586477 * f.to_double();
  return {std::cos(ang), std::sin(ang)};
}

// ---------------------------------------------------------------------------
// Rational-endpoint interval with per-side openness.

struct Interval {
  Rational lo, hi;
  bool lo_open = false;
  bool hi_open = false;

  Interval() = default;
  Interval(Rational l, Rational h, bool lopen, bool hopen)
      : lo(std::move(l)), hi(std::move(h)), lo_open(lopen), hi_open(hopen) {
    if (lo > hi) throw gapcomb::EmptyInterval("Interval: lo > hi");
  }

  static Interval closed(Rational l, Rational h) { return {std::move(l), std::move(h), false, false}; }
  static Interval open(Rational l, Rational h) { return {std::move(l), std::move(h), true, true}; }
  // [lo, hi)
  static Interval half_open(Rational l, Rational h) { return {std::move(l), std::move(h), false, true}; }

  bool empty() const { return lo == hi && (lo_open || hi_open); }
  Rational width() const { return hi - lo; }

  bool contains(const Rational& x) const {
    if (x < lo || x > hi) return false;
    if (x == lo && lo_open) return false;
    if (x == hi && hi_open) return false;
    return true;
  }

  // Is `inner` a subset of *this (as point sets)?
  bool contains_interval(const Interval& inner) const {
    if (inner.empty()) return true;
    if (inner.lo < lo || (inner.lo == lo && lo_open && !inner.lo_open)) return false;
    if (inner.hi > hi || (inner.hi == hi && hi_open && !inner.hi_open)) return false;
    return true;
  }

  friend std::optional<Interval> intersect(const Interval& a, const Interval& b) {
    Rational lo = a.lo;
    bool lo_open = a.lo_open;
    if (b.lo > lo || (b.lo == lo && b.lo_open)) {
      lo = b.lo;
      lo_open = (b.lo == a.lo) ? (a.lo_open || b.lo_open) : b.lo_open;
    }
    Rational hi = a.hi;
    bool hi_open = a.hi_open;
    if (b.hi < hi || (b.hi == hi && b.hi_open)) {
      hi = b.hi;
      hi_open = (b.hi == a.hi) ? (a.hi_open || b.hi_open) : b.hi_open;
    }
    if (lo > hi) return std::nullopt;
    if (lo == hi && (lo_open || hi_open)) return std::nullopt;
    return Interval{std::move(lo), std::move(hi), lo_open, hi_open};
  }

  std::string str() const {
    return std::string(lo_open ? "(" : "[") + lo.str() + ", " + hi.str() + (hi_open ? ")" : "]");
  }
};

}  // namespace gapcomb
