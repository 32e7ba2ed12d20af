#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace drqn {

// Signed fixed-point decimal with eight fractional digits.
//
// Prices enter the system rounded to four fractional digits; the extra digits
// keep fee arithmetic (0.1% of a four-digit notional) exact.
class Decimal {
 public:
  static constexpr int kFractionDigits = 8;
  static constexpr std::int64_t kScale = 100'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_units(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  static Decimal from_int(std::int64_t value);
  // Round-half-away-from-zero to `digits` fractional digits.
  static Decimal from_double(double value, int digits = kFractionDigits);
  // Accepts [+-]digits[.digits]; more than eight fractional digits are rounded.
  static std::optional<Decimal> parse(std::string_view text);

  constexpr std::int64_t units() const { return units_; }
  double to_double() const { return static_cast<double>(units_) / static_cast<double>(kScale); }
  // Shortest exact representation: "10.05", "-3", "0.0001".
  std::string to_string() const;

  Decimal rounded(int digits) const;
  Decimal abs() const { return units_ < 0 ? -*this : *this; }

  constexpr auto operator<=>(const Decimal&) const = default;

  Decimal operator-() const;
  Decimal& operator+=(Decimal rhs);
  Decimal& operator-=(Decimal rhs);

  friend Decimal operator+(Decimal a, Decimal b) { return a += b; }
  friend Decimal operator-(Decimal a, Decimal b) { return a -= b; }
  friend Decimal operator*(Decimal a, std::int64_t k);
  friend Decimal operator*(std::int64_t k, Decimal a) { return a * k; }
  // Product rounded half-to-even at the eighth digit; exact whenever the true
  // product has at most eight fractional digits.
  friend Decimal operator*(Decimal a, Decimal b);

 private:
  std::int64_t units_ = 0;
};

}  // namespace drqn
