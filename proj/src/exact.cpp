#include "nllt/exact.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>

#include "nllt/error.hpp"

namespace nllt {

namespace {

using Wide = __int128;

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(Wide v) {
  return v >= std::numeric_limits<std::int64_t>::min() && v <= std::numeric_limits<std::int64_t>::max();
}

std::string trim(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c != ' ' && c != '\t') out.push_back(c);
  }
  return out;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "rational with zero denominator");
  *this = from_wide(num, den);
}

Rational Rational::from_wide(Wide num, Wide den) {
  if (den == 0) throw Error(ErrorCode::InvalidArgument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (num == 0) den = 1;
  if (!fits(num) || !fits(den)) throw Error(ErrorCode::Overflow, "rational arithmetic exceeds 64 bits");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return fraction_str();
}

std::string Rational::fraction_str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

Rational Rational::parse(std::string_view raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty rational");
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty()) throw Error(ErrorCode::ParseError, "malformed rational '" + text + "'");
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) throw Error(ErrorCode::ParseError, "malformed rational '" + text + "'");
    for (std::size_t k = i; k < s.size(); ++k) {
      if (s[k] < '0' || s[k] > '9') throw Error(ErrorCode::ParseError, "malformed rational '" + text + "'");
    }
    errno = 0;
    const long long v = std::strtoll(std::string(s).c_str(), nullptr, 10);
    if (errno == ERANGE) throw Error(ErrorCode::Overflow, "integer out of range in '" + text + "'");
    return v;
  };
  if (auto slash = text.find('/'); slash != std::string::npos) {
    return Rational(parse_int(std::string_view(text).substr(0, slash)),
                    parse_int(std::string_view(text).substr(slash + 1)));
  }
  if (auto dot = text.find('.'); dot != std::string::npos) {
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    const std::size_t frac = text.size() - dot - 1;
    if (frac > 18) throw Error(ErrorCode::Overflow, "too many decimals in '" + text + "'");
    if (digits == "-" || digits == "+" || digits.empty()) throw Error(ErrorCode::ParseError, "malformed rational '" + text + "'");
    std::int64_t den = 1;
    for (std::size_t k = 0; k < frac; ++k) den *= 10;
    return Rational(parse_int(digits), den);
  }
  return Rational(parse_int(text));
}

Rational Rational::operator-() const { return from_wide(-static_cast<Wide>(num_), den_); }

Rational& Rational::operator+=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_ + static_cast<Wide>(rhs.num_) * den_,
                    static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_ - static_cast<Wide>(rhs.num_) * den_,
                    static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.num_, static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw Error(ErrorCode::InvalidArgument, "rational division by zero");
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_, static_cast<Wide>(den_) * rhs.num_);
  return *this;
}

std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
  const Wide l = static_cast<Wide>(lhs.num_) * rhs.den_;
  const Wide r = static_cast<Wide>(rhs.num_) * lhs.den_;
  if (l < r) return std::strong_ordering::less;
  if (l > r) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

Rational gcd(const Rational& a, const Rational& b) {
  if (a.is_zero()) return abs(b);
  if (b.is_zero()) return abs(a);
  const std::int64_t g = std::gcd(a.num(), b.num());
  const Wide l = static_cast<Wide>(a.den() / std::gcd(a.den(), b.den())) * b.den();
  if (!fits(l)) throw Error(ErrorCode::Overflow, "gcd denominator exceeds 64 bits");
  return Rational(g, static_cast<std::int64_t>(l));
}

std::optional<Rational> recognize_rational(double x, std::int64_t max_den, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  const double bound = tol * std::max(1.0, std::abs(x));
  if (std::abs(x) > 9e15) return std::nullopt;
  // Continued-fraction convergents h/k.
  long double rem = x;
  Wide h_prev = 1, h = static_cast<Wide>(std::floor(rem));
  Wide k_prev = 0, k = 1;
  rem -= std::floor(rem);
  for (int iter = 0; iter < 64; ++iter) {
    if (k > max_den) break;
    const double approx = static_cast<double>(static_cast<long double>(h) / static_cast<long double>(k));
    if (std::abs(approx - x) <= bound && fits(h)) return Rational(static_cast<std::int64_t>(h), static_cast<std::int64_t>(k));
    if (rem < 1e-18L) break;
    rem = 1.0L / rem;
    const long double a = std::floor(rem);
    rem -= a;
    if (a > 1e18L) break;
    const Wide ai = static_cast<Wide>(a);
    const Wide h_next = ai * h + h_prev;
    const Wide k_next = ai * k + k_prev;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
  }
  return std::nullopt;
}

int QSqrt2::sign() const {
  const int sa = a_.sign();
  const int sb = b_.sign();
  if (sb == 0) return sa;
  if (sa == 0 || sa == sb) return sa == 0 ? sb : sa;
  // Opposite signs: compare a^2 with 2 b^2 exactly.
  using boost::multiprecision::cpp_int;
  const cpp_int an = a_.num(), ad = a_.den(), bn = b_.num(), bd = b_.den();
  const cpp_int lhs = an * an * bd * bd;
  const cpp_int rhs = 2 * bn * bn * ad * ad;
  return lhs > rhs ? sa : sb;
}

double QSqrt2::to_double() const { return a_.to_double() + b_.to_double() * std::sqrt(2.0); }

std::string QSqrt2::str() const {
  if (b_.is_zero()) return a_.str();
  const std::string tail = (abs(b_) == Rational(1) ? std::string("sqrt2") : abs(b_).str() + "*sqrt2");
  if (a_.is_zero()) return (b_.sign() < 0 ? "-" : "") + tail;
  return a_.str() + (b_.sign() < 0 ? "-" : "+") + tail;
}

QSqrt2 QSqrt2::parse(std::string_view raw) {
  const std::string text = trim(raw);
  if (text.empty()) throw Error(ErrorCode::ParseError, "empty exact value");
  QSqrt2 total;
  std::size_t start = 0;
  auto flush = [&](std::string term) {
    bool negative = false;
    if (!term.empty() && (term[0] == '+' || term[0] == '-')) {
      negative = term[0] == '-';
      term.erase(0, 1);
    }
    if (term.empty()) throw Error(ErrorCode::ParseError, "malformed exact value '" + text + "'");
    QSqrt2 value;
    for (std::string suffix : {"sqrt(2)", "sqrt2"}) {
      if (term.size() >= suffix.size() && term.compare(term.size() - suffix.size(), suffix.size(), suffix) == 0) {
        std::string coef = term.substr(0, term.size() - suffix.size());
        if (!coef.empty() && coef.back() == '*') coef.pop_back();
        value = QSqrt2(Rational{}, coef.empty() ? Rational(1) : Rational::parse(coef));
        term.clear();
        break;
      }
    }
    if (!term.empty()) value = QSqrt2(Rational::parse(term));
    total += negative ? -value : value;
  };
  for (std::size_t i = 1; i < text.size(); ++i) {
    if ((text[i] == '+' || text[i] == '-') && text[i - 1] != '*' && text[i - 1] != '/') {
      flush(text.substr(start, i - start));
      start = i;
    }
  }
  flush(text.substr(start));
  return total;
}

QSqrt2& QSqrt2::operator+=(const QSqrt2& rhs) {
  a_ += rhs.a_;
  b_ += rhs.b_;
  return *this;
}

QSqrt2& QSqrt2::operator-=(const QSqrt2& rhs) {
  a_ -= rhs.a_;
  b_ -= rhs.b_;
  return *this;
}

QSqrt2& QSqrt2::operator*=(const QSqrt2& rhs) {
  const Rational a = a_ * rhs.a_ + Rational(2) * b_ * rhs.b_;
  const Rational b = a_ * rhs.b_ + b_ * rhs.a_;
  a_ = a;
  b_ = b;
  return *this;
}

QSqrt2& QSqrt2::operator/=(const QSqrt2& rhs) {
  // (a + b r)/(c + d r) = (a + b r)(c - d r)/(c^2 - 2 d^2); the norm never
  // vanishes for nonzero rhs since sqrt 2 is irrational.
  const Rational norm = rhs.a_ * rhs.a_ - Rational(2) * rhs.b_ * rhs.b_;
  if (norm.is_zero()) throw Error(ErrorCode::InvalidArgument, "division by zero in Q(sqrt2)");
  *this *= QSqrt2(rhs.a_, -rhs.b_);
  a_ /= norm;
  b_ /= norm;
  return *this;
}

std::strong_ordering operator<=>(const QSqrt2& lhs, const QSqrt2& rhs) {
  const int s = (lhs - rhs).sign();
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

QSqrt2 abs(const QSqrt2& x) { return x.sign() < 0 ? -x : x; }

}  // namespace nllt
