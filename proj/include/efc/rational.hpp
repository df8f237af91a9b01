#pragma once

// Exact rational scalars and the factorial kernels built on them.
//
// Every closed-form quantity in this library (EPPF values, coagulation and
// splitting rates, stationary probabilities) is a rational function of the
// parameters, so with rational inputs the whole verification path can run
// without any rounding.  Rational wraps an arbitrary-precision fraction kept
// in canonical form: positive denominator, gcd(|num|, den) = 1.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace efc {

using BigInt = boost::multiprecision::cpp_int;

class Rational {
 public:
  Rational() : value_(0) {}
  Rational(long long v) : value_(v) {}  // NOLINT: implicit by design
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    value_.assign(boost::multiprecision::cpp_rational(num, den));
  }
  Rational(long long num, long long den) : Rational(BigInt(num), BigInt(den)) {}

  // Accepts "p/q" or "p" with optional leading '-'; q must be positive.
  static Rational parse(std::string_view text);

  BigInt numerator() const { return boost::multiprecision::numerator(value_); }
  BigInt denominator() const { return boost::multiprecision::denominator(value_); }

  bool is_zero() const { return value_ == 0; }
  int sign() const { return value_ < 0 ? -1 : (value_ > 0 ? 1 : 0); }
  Rational abs() const { return value_ < 0 ? Rational(-value_) : *this; }

  double to_double() const { return value_.convert_to<double>(); }

  // Emits "p/q", or just "p" when the denominator is 1.
  std::string str() const {
    std::string s = numerator().str();
    BigInt den = denominator();
    if (den != 1) s += "/" + den.str();
    return s;
  }

  Rational operator-() const { return Rational(-value_); }
  Rational& operator+=(const Rational& o) { value_ += o.value_; return *this; }
  Rational& operator-=(const Rational& o) { value_ -= o.value_; return *this; }
  Rational& operator*=(const Rational& o) { value_ *= o.value_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.value_ == 0) throw std::domain_error("Rational: division by zero");
    value_ /= o.value_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.value_ == b.value_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.value_ != b.value_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.value_ < b.value_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.value_ <= b.value_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.value_ > b.value_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.value_ >= b.value_; }

 private:
  explicit Rational(boost::multiprecision::cpp_rational v) : value_(std::move(v)) {}
  boost::multiprecision::cpp_rational value_;
};

inline Rational Rational::parse(std::string_view text) {
  auto fail = [&] {
    throw std::invalid_argument("Rational::parse: bad literal '" + std::string(text) + "'");
  };
  if (text.empty()) fail();
  std::string_view num = text;
  std::string_view den;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    num = text.substr(0, slash);
    den = text.substr(slash + 1);
    if (den.empty()) fail();
  }
  auto is_int = [](std::string_view s, bool allow_sign) {
    if (allow_sign && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
    if (s.empty()) return false;
    for (char c : s)
      if (c < '0' || c > '9') return false;
    return true;
  };
  if (!is_int(num, true)) fail();
  if (!den.empty() && !is_int(den, false)) fail();
  BigInt p{std::string(num)};
  BigInt q = den.empty() ? BigInt(1) : BigInt{std::string(den)};
  if (q == 0) fail();
  return Rational(p, q);
}

inline std::string to_string(const Rational& r) { return r.str(); }

// (a)_{l} = a (a+1) ... (a+l-1), with the empty product equal to 1.
inline Rational rising_factorial(const Rational& a, unsigned len) {
  Rational result(1);
  Rational factor = a;
  for (unsigned i = 0; i < len; ++i) {
    result *= factor;
    factor += Rational(1);
  }
  return result;
}

// -(-alpha)_{m}: the positive weight a block of size m contributes to the
// Poisson-Dirichlet sampling formula.  Equals alpha * (1-alpha)_{m-1}.
inline Rational alpha_weight(const Rational& alpha, unsigned m) {
  if (!(Rational(0) < alpha && alpha < Rational(1)))
    throw std::domain_error("alpha_weight: alpha must lie in (0,1)");
  if (m == 0) throw std::domain_error("alpha_weight: block size must be >= 1");
  return -rising_factorial(-alpha, m);
}

inline BigInt factorial(unsigned k) {
  BigInt f = 1;
  for (unsigned i = 2; i <= k; ++i) f *= i;
  return f;
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt c = 1;
  for (unsigned i = 0; i < k; ++i) {
    c *= n - i;
    c /= i + 1;
  }
  return c;
}

}  // namespace efc
