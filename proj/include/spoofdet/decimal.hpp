#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace spoofdet {

/// Fixed-point decimal with 8 fractional digits stored in a signed 64-bit
/// integer. Distinct tags keep prices and volumes from mixing.
template <class Tag>
class Decimal {
 public:
  static constexpr int kDigits = 8;
  static constexpr std::int64_t kScale = 100'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_raw(std::int64_t raw) noexcept {
    Decimal d;
    d.raw_ = raw;
    return d;
  }
  static constexpr Decimal from_units(std::int64_t units) noexcept {
    return from_raw(units * kScale);
  }
  // Rounds to the nearest representable value. Only for tests and generators;
  // ingestion goes through parse().
  static Decimal from_double(double v) noexcept;

  // Accepts an optional sign, digits and at most kDigits fractional digits.
  // Throws DataError on anything else.
  static Decimal parse(std::string_view text);

  constexpr std::int64_t raw() const noexcept { return raw_; }
  constexpr double to_double() const noexcept {
    return static_cast<double>(raw_) / static_cast<double>(kScale);
  }
  // Canonical form: no trailing fractional zeros, no '.' for integers.
  std::string to_string() const;

  constexpr bool is_zero() const noexcept { return raw_ == 0; }
  constexpr bool positive() const noexcept { return raw_ > 0; }

  constexpr Decimal operator-() const noexcept { return from_raw(-raw_); }
  constexpr Decimal& operator+=(Decimal o) noexcept {
    raw_ += o.raw_;
    return *this;
  }
  constexpr Decimal& operator-=(Decimal o) noexcept {
    raw_ -= o.raw_;
    return *this;
  }
  friend constexpr Decimal operator+(Decimal a, Decimal b) noexcept { return a += b; }
  friend constexpr Decimal operator-(Decimal a, Decimal b) noexcept { return a -= b; }
  friend constexpr auto operator<=>(Decimal, Decimal) = default;

 private:
  std::int64_t raw_ = 0;
};

struct PriceTag {};
struct VolumeTag {};

using Price = Decimal<PriceTag>;
using Volume = Decimal<VolumeTag>;

namespace detail {
std::int64_t parse_fixed(std::string_view text);
std::string format_fixed(std::int64_t raw);
std::int64_t round_fixed(double v) noexcept;
}  // namespace detail

template <class Tag>
Decimal<Tag> Decimal<Tag>::from_double(double v) noexcept {
  return from_raw(detail::round_fixed(v));
}

template <class Tag>
Decimal<Tag> Decimal<Tag>::parse(std::string_view text) {
  return from_raw(detail::parse_fixed(text));
}

template <class Tag>
std::string Decimal<Tag>::to_string() const {
  return detail::format_fixed(raw_);
}

}  // namespace spoofdet
