#include "jointguard/money.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace jointguard {

namespace {

std::int64_t round_to_units(long double value) {
  if (!std::isfinite(static_cast<double>(value)) ||
      std::fabs(value) >= static_cast<long double>(std::numeric_limits<std::int64_t>::max())) {
    throw std::overflow_error("currency amount out of range");
  }
  return std::llround(value);
}

}  // namespace

Money Money::from_dollars(double dollars) {
  return Money(round_to_units(static_cast<long double>(dollars) * kUnitsPerDollar));
}

Money Money::parse(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty currency amount");
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '-' || text[pos] == '+') {
    negative = text[pos] == '-';
    ++pos;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool in_frac = false;
  constexpr std::int64_t kMaxWhole = std::numeric_limits<std::int64_t>::max() / kUnitsPerDollar - 1;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (c < '0' || c > '9') throw std::invalid_argument("malformed currency amount '" + text + "'");
    any_digit = true;
    if (in_frac) {
      if (frac_digits == 9) throw std::invalid_argument("more than nine decimals in '" + text + "'");
      frac = frac * 10 + (c - '0');
      ++frac_digits;
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > kMaxWhole) throw std::overflow_error("currency amount out of range");
    }
  }
  if (!any_digit) throw std::invalid_argument("malformed currency amount '" + text + "'");
  for (int i = frac_digits; i < 9; ++i) frac *= 10;
  const std::int64_t units = whole * kUnitsPerDollar + frac;
  return Money(negative ? -units : units);
}

std::int64_t Money::rounded_cents() const {
  const std::int64_t q = units_ / kUnitsPerCent;
  const std::int64_t r = units_ % kUnitsPerCent;
  if (2 * std::llabs(r) >= kUnitsPerCent) return q + (units_ < 0 ? -1 : 1);
  return q;
}

Money Money::operator+(Money other) const {
  std::int64_t out = 0;
  if (__builtin_add_overflow(units_, other.units_, &out)) throw std::overflow_error("currency overflow");
  return Money(out);
}

Money Money::operator-(Money other) const {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(units_, other.units_, &out)) throw std::overflow_error("currency overflow");
  return Money(out);
}

Money Money::operator*(std::int64_t count) const {
  std::int64_t out = 0;
  if (__builtin_mul_overflow(units_, count, &out)) throw std::overflow_error("currency overflow");
  return Money(out);
}

Money Money::scaled(double factor) const {
  return Money(round_to_units(static_cast<long double>(units_) * static_cast<long double>(factor)));
}

Money Money::divided(std::int64_t count) const {
  if (count == 0) throw std::domain_error("division of currency by zero");
  return Money(round_to_units(static_cast<long double>(units_) / static_cast<long double>(count)));
}

std::string Money::to_string() const {
  const bool negative = units_ < 0;
  // Magnitude via unsigned arithmetic so INT64_MIN is printable.
  const auto magnitude = negative ? 0ULL - static_cast<unsigned long long>(units_)
                                  : static_cast<unsigned long long>(units_);
  const auto whole = magnitude / kUnitsPerDollar;
  auto frac = fmt::format("{:09d}", magnitude % kUnitsPerDollar);
  while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
  return fmt::format("{}{}.{}", negative ? "-" : "", whole, frac);
}

std::string Money::to_cents_string() const {
  const std::int64_t c = rounded_cents();
  const std::uint64_t mag = c < 0 ? 0 - static_cast<std::uint64_t>(c) : static_cast<std::uint64_t>(c);
  std::string s = std::to_string(mag / 100) + '.';
  const auto frac = mag % 100;
  s += static_cast<char>('0' + frac / 10);
  s += static_cast<char>('0' + frac % 10);
  return c < 0 ? "-" + s : s;
}

}  // namespace jointguard
