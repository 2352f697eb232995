#include "plancritic/rational.hpp"

#include <numeric>
#include <stdexcept>

namespace plancritic {

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

std::int64_t narrow(Wide v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("rational overflow");
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  normalize();
}

void Rational::normalize() {
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
  if (g > 1) {
    num_ /= g;
    den_ /= g;
  }
}

bool Rational::try_parse(std::string_view text, Rational& out) {
  if (text.empty() || text.size() > 32) return false;
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    ++i;
  }
  std::int64_t num = 0;
  std::int64_t den = 1;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c == '.') {
      if (seen_point) return false;
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return false;
    any_digit = true;
    if (num > (INT64_MAX - 9) / 10) return false;
    num = num * 10 + (c - '0');
    if (seen_point) {
      if (den > INT64_MAX / 10) return false;
      den *= 10;
    }
  }
  if (!any_digit) return false;
  out = Rational(negative ? -num : num, den);
  return true;
}

Rational Rational::parse(std::string_view text) {
  Rational r;
  if (!try_parse(text, r)) throw std::invalid_argument("not a decimal number: " + std::string(text));
  return r;
}

std::string Rational::str() const { return str_fixed(0); }

std::string Rational::str_fixed(int min_digits) const {
  // Scale the denominator up to a power of ten when possible.
  std::int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);
  int digits = std::max(twos, fives);
  Wide scaled = static_cast<Wide>(num_);
  for (int k = twos; k < digits; ++k) scaled *= 2;
  for (int k = fives; k < digits; ++k) scaled *= 5;
  while (digits < min_digits) {
    scaled *= 10;
    ++digits;
  }
  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string s;
  if (scaled == 0) s = "0";
  while (scaled > 0) {
    s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  }
  if (digits > 0) {
    while (static_cast<int>(s.size()) <= digits) s.insert(s.begin(), '0');
    s.insert(s.end() - digits, '.');
  }
  return negative ? "-" + s : s;
}

Rational operator+(const Rational& a, const Rational& b) {
  Wide n = static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_;
  Wide d = static_cast<Wide>(a.den_) * b.den_;
  Wide g = wide_gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational(narrow(n), narrow(d));
}

Rational operator-(const Rational& a, const Rational& b) { return a + Rational(-b.num_, b.den_); }

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = static_cast<Wide>(a.num_) * b.den_;
  Wide rhs = static_cast<Wide>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace plancritic
