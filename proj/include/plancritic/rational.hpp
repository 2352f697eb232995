#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace plancritic {

// Exact non-negative-friendly rational used for plan times and constraint
// durations. Values read from text are terminating decimals, so rendering
// back to decimal is always exact.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT
  Rational(std::int64_t num, std::int64_t den);

  // Parses "5", "0.000", "12.25". Throws std::invalid_argument.
  static Rational parse(std::string_view text);
  // Same, returning false instead of throwing.
  static bool try_parse(std::string_view text, Rational& out);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }
  bool is_integer() const { return den_ == 1; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  // Exact decimal text; integers render without a fractional part.
  std::string str() const;
  // Exact decimal text with at least `min_digits` fractional digits.
  std::string str_fixed(int min_digits) const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  void normalize();

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace plancritic
