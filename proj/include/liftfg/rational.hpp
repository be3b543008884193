#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace liftfg {

using BigInt = boost::multiprecision::cpp_int;

/// Arbitrary-precision rational, always kept reduced with a positive
/// denominator. Table potentials additionally require a positive value,
/// which callers check via is_positive().
class Rational {
 public:
  Rational() : v_(0) {}
  Rational(long long n) : v_(n) {}  // NOLINT: implicit by design, mirrors integer literals
  Rational(const BigInt& n) : v_(n) {}
  Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) {
      throw std::invalid_argument("rational: zero denominator");
    }
    v_ = den < 0 ? Backend(-num, -den) : Backend(num, den);
  }
  Rational(long long num, long long den) : Rational(BigInt(num), BigInt(den)) {}

  BigInt numerator() const { return boost::multiprecision::numerator(v_); }
  BigInt denominator() const { return boost::multiprecision::denominator(v_); }

  bool is_zero() const { return v_ == 0; }
  bool is_positive() const { return v_ > 0; }
  bool is_integer() const { return denominator() == 1; }

  Rational operator-() const { return Rational(Backend(-v_)); }
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
  Rational& operator/=(const Rational& o) {
    if (o.is_zero()) {
      throw std::invalid_argument("rational: division by zero");
    }
    v_ /= o.v_;
    return *this;
  }

  friend Rational operator+(Rational a, const Rational& b) { return a += b; }
  friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
  friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
  friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

  friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

  Rational pow(unsigned exp) const {
    Rational result(1);
    Rational base = *this;
    while (exp != 0) {
      if (exp & 1u) result *= base;
      base *= base;
      exp >>= 1u;
    }
    return result;
  }

  Rational abs() const { return v_ < 0 ? -*this : *this; }

  double to_double() const { return v_.convert_to<double>(); }

  /// Renders "n" for integers, "n/d" otherwise.
  std::string str() const {
    const BigInt den = denominator();
    if (den == 1) return numerator().str();
    return numerator().str() + "/" + den.str();
  }

  /// Accepts "123", "-4", "num/den". A non-reduced input is canonicalised.
  static std::optional<Rational> parse(std::string_view text) {
    const auto slash = text.find('/');
    if (slash == std::string_view::npos) {
      auto n = parse_int(text);
      if (!n) return std::nullopt;
      return Rational(*n);
    }
    auto num = parse_int(text.substr(0, slash));
    auto den = parse_int(text.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    return Rational(*num, *den);
  }

  static Rational from_string(std::string_view text) {
    auto r = parse(text);
    if (!r) {
      throw std::invalid_argument("rational: cannot parse '" + std::string(text) + "'");
    }
    return *r;
  }

  /// Exact value of a finite double (a binary fraction).
  static Rational from_double(double value) {
    return Rational(Backend(value));
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
    return os << r.str();
  }

 private:
  using Backend = boost::multiprecision::cpp_rational;

  explicit Rational(Backend v) : v_(std::move(v)) {}

  static std::optional<BigInt> parse_int(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::size_t start = text[0] == '-' ? 1 : 0;
    if (start == text.size()) return std::nullopt;
    for (std::size_t i = start; i < text.size(); ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
    }
    return BigInt(std::string(text));
  }

  Backend v_;
};

}  // namespace liftfg
