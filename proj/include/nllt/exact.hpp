#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace nllt {

/// Exact rational on 64-bit numerator and denominator. Arithmetic uses
/// 128-bit intermediates and throws Error(Overflow) when a reduced result
/// does not fit.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t num, std::int64_t den = 1);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  int sign() const noexcept { return (num_ > 0) - (num_ < 0); }
  bool is_zero() const noexcept { return num_ == 0; }
  bool is_integer() const noexcept { return den_ == 1; }
  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// "p" for integers, "p/q" otherwise.
  std::string str() const;
  /// Always "p/q".
  std::string fraction_str() const;

  /// Accepts "p", "p/q" and finite decimals such as "-0.75".
  static Rational parse(std::string_view text);

  Rational operator-() const;
  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs);

 private:
  static Rational from_wide(__int128 num, __int128 den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

Rational abs(const Rational& r);

/// Largest positive rational g with a/g and b/g both integers; gcd(0, b) = |b|.
Rational gcd(const Rational& a, const Rational& b);

/// Best rational approximation of x with denominator at most max_den, accepted
/// only when it reproduces x within tol * max(1, |x|).
std::optional<Rational> recognize_rational(double x, std::int64_t max_den = 1'000'000,
                                           double tol = 1e-13);

/// Element a + b*sqrt(2) of the quadratic field Q(sqrt 2). Ordering and sign
/// are exact.
class QSqrt2 {
 public:
  QSqrt2() = default;
  QSqrt2(Rational a, Rational b = Rational{}) : a_(a), b_(b) {}
  QSqrt2(std::int64_t a) : a_(a) {}

  const Rational& rational_part() const noexcept { return a_; }
  const Rational& sqrt2_part() const noexcept { return b_; }

  bool is_zero() const noexcept { return a_.is_zero() && b_.is_zero(); }
  bool is_rational() const noexcept { return b_.is_zero(); }
  bool is_integer() const noexcept { return b_.is_zero() && a_.is_integer(); }
  int sign() const;
  double to_double() const;

  /// "a", "b*sqrt2" or "a+b*sqrt2" with rationals in str() form.
  std::string str() const;

  /// Sums of terms "q" or "q*sqrt2" (also "sqrt2", "-sqrt(2)", "1/2*sqrt2").
  static QSqrt2 parse(std::string_view text);

  QSqrt2 operator-() const { return {-a_, -b_}; }
  QSqrt2& operator+=(const QSqrt2& rhs);
  QSqrt2& operator-=(const QSqrt2& rhs);
  QSqrt2& operator*=(const QSqrt2& rhs);
  QSqrt2& operator/=(const QSqrt2& rhs);

  friend QSqrt2 operator+(QSqrt2 lhs, const QSqrt2& rhs) { return lhs += rhs; }
  friend QSqrt2 operator-(QSqrt2 lhs, const QSqrt2& rhs) { return lhs -= rhs; }
  friend QSqrt2 operator*(QSqrt2 lhs, const QSqrt2& rhs) { return lhs *= rhs; }
  friend QSqrt2 operator/(QSqrt2 lhs, const QSqrt2& rhs) { return lhs /= rhs; }

  friend bool operator==(const QSqrt2&, const QSqrt2&) = default;
  friend std::strong_ordering operator<=>(const QSqrt2& lhs, const QSqrt2& rhs);

 private:
  Rational a_;
  Rational b_;
};

QSqrt2 abs(const QSqrt2& x);

}  // namespace nllt
