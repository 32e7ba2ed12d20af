#include "drqn/decimal.hpp"

#include <cmath>
#include <stdexcept>

namespace drqn {
namespace {

constexpr std::int64_t pow10(int n) {
  std::int64_t r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) throw std::overflow_error("Decimal overflow");
  return static_cast<std::int64_t>(v);
}

// Divide rounding half away from zero.
__int128 div_round_away(__int128 num, __int128 den) {
  __int128 q = num / den;
  __int128 r = num % den;
  if (r < 0) r = -r;
  if (2 * r >= den) q += (num < 0) ? -1 : 1;
  return q;
}

}  // namespace

Decimal Decimal::from_int(std::int64_t value) {
  return from_units(checked(static_cast<__int128>(value) * kScale));
}

Decimal Decimal::from_double(double value, int digits) {
  if (!std::isfinite(value)) throw std::domain_error("Decimal from non-finite double");
  const double step = static_cast<double>(pow10(digits));
  const double scaled = std::round(value * step);
  if (std::fabs(scaled) > 9.0e18) throw std::overflow_error("Decimal overflow");
  return from_units(checked(static_cast<__int128>(scaled) * pow10(kFractionDigits - digits)));
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  __int128 whole = 0;
  std::size_t whole_digits = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    whole = whole * 10 + (text[i] - '0');
    if (whole > INT64_MAX) return std::nullopt;
    ++i;
    ++whole_digits;
  }
  __int128 frac = 0;
  int frac_digits = 0;
  bool round_up = false;
  bool saw_point = false;
  if (i < text.size() && text[i] == '.') {
    saw_point = true;
    ++i;
    bool first_dropped = true;
    while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
      if (frac_digits < kFractionDigits) {
        frac = frac * 10 + (text[i] - '0');
        ++frac_digits;
      } else if (first_dropped) {
        round_up = text[i] >= '5';
        first_dropped = false;
      }
      ++i;
    }
  }
  if (i != text.size()) return std::nullopt;
  if (whole_digits == 0 && (!saw_point || (frac_digits == 0))) return std::nullopt;
  __int128 units = whole * kScale + frac * pow10(kFractionDigits - frac_digits);
  if (round_up) units += 1;
  if (negative) units = -units;
  if (units > INT64_MAX || units < INT64_MIN) return std::nullopt;
  return from_units(static_cast<std::int64_t>(units));
}

std::string Decimal::to_string() const {
  const bool negative = units_ < 0;
  const unsigned __int128 mag =
      negative ? static_cast<unsigned __int128>(-static_cast<__int128>(units_))
               : static_cast<unsigned __int128>(units_);
  const auto whole = static_cast<std::uint64_t>(mag / kScale);
  auto frac = static_cast<std::uint64_t>(mag % kScale);
  std::string out = negative ? "-" : "";
  out += std::to_string(whole);
  if (frac != 0) {
    std::string digits(kFractionDigits, '0');
    for (int k = kFractionDigits - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<char>('0' + frac % 10);
      frac /= 10;
    }
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  return out;
}

Decimal Decimal::rounded(int digits) const {
  const std::int64_t step = pow10(kFractionDigits - digits);
  return from_units(checked(div_round_away(units_, step) * step));
}

Decimal Decimal::operator-() const { return from_units(checked(-static_cast<__int128>(units_))); }

Decimal& Decimal::operator+=(Decimal rhs) {
  units_ = checked(static_cast<__int128>(units_) + rhs.units_);
  return *this;
}

Decimal& Decimal::operator-=(Decimal rhs) {
  units_ = checked(static_cast<__int128>(units_) - rhs.units_);
  return *this;
}

Decimal operator*(Decimal a, std::int64_t k) {
  return Decimal::from_units(checked(static_cast<__int128>(a.units_) * k));
}

Decimal operator*(Decimal a, Decimal b) {
  const __int128 p = static_cast<__int128>(a.units_) * b.units_;
  __int128 q = p / Decimal::kScale;
  __int128 r = p % Decimal::kScale;
  const __int128 twice = 2 * (r < 0 ? -r : r);
  if (twice > Decimal::kScale || (twice == Decimal::kScale && (q % 2 != 0))) {
    q += (p < 0) ? -1 : 1;
  }
  return Decimal::from_units(checked(q));
}

}  // namespace drqn
