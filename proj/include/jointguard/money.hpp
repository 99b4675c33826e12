#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace jointguard {

// Fixed-point currency amount in units of 1e-9 dollars. Dollar figures with
// up to nine decimals are exact; arithmetic throws std::overflow_error
// instead of wrapping.
class Money {
 public:
  static constexpr std::int64_t kUnitsPerDollar = 1'000'000'000;
  static constexpr std::int64_t kUnitsPerCent = kUnitsPerDollar / 100;

  constexpr Money() = default;

  static constexpr Money from_units(std::int64_t units) { return Money(units); }
  static constexpr Money from_cents(std::int64_t cents) { return Money(cents * kUnitsPerCent); }
  // Rounds to the nearest unit, ties away from zero.
  static Money from_dollars(double dollars);
  // Parses "20.16", "-3", "0.000000001". Throws std::invalid_argument.
  static Money parse(const std::string& text);

  constexpr std::int64_t units() const { return units_; }
  double dollars() const { return static_cast<double>(units_) / static_cast<double>(kUnitsPerDollar); }

  // Rounded to the nearest cent, ties away from zero.
  std::int64_t rounded_cents() const;

  Money operator+(Money other) const;
  Money operator-(Money other) const;
  Money operator*(std::int64_t count) const;
  Money& operator+=(Money other) { return *this = *this + other; }

  // Multiplies by a real factor and rounds to the nearest unit.
  Money scaled(double factor) const;
  // Divides by an integer count, rounding to the nearest unit.
  Money divided(std::int64_t count) const;

  constexpr auto operator<=>(const Money&) const = default;

  // Decimal dollars without a currency sign: at least two decimals, more only
  // when needed ("20.16", "0.0000125", "-3.00").
  std::string to_string() const;
  // Rounded to the cent: "7312482.62".
  std::string to_cents_string() const;

 private:
  constexpr explicit Money(std::int64_t units) : units_(units) {}
  std::int64_t units_ = 0;
};

}  // namespace jointguard
