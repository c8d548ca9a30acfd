#include "spoofdet/decimal.hpp"

#include <cmath>
#include <limits>

#include "spoofdet/errors.hpp"

namespace spoofdet::detail {

std::int64_t parse_fixed(std::string_view text) {
  auto fail = [&]() -> DataError {
    return DataError("invalid decimal '" + std::string(text) + "'");
  };
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
    negative = text[i] == '-';
    ++i;
  }
  constexpr std::int64_t kMax = std::numeric_limits<std::int64_t>::max();
  std::int64_t whole = 0;
  std::size_t whole_digits = 0;
  for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++whole_digits) {
    const int d = text[i] - '0';
    if (whole > (kMax / Decimal<void>::kScale - d) / 10) throw fail();
    whole = whole * 10 + d;
  }
  std::int64_t frac = 0;
  std::size_t frac_digits = 0;
  if (i < text.size() && text[i] == '.') {
    ++i;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i, ++frac_digits) {
      if (frac_digits >= static_cast<std::size_t>(Decimal<void>::kDigits)) throw fail();
      frac = frac * 10 + (text[i] - '0');
    }
  }
  if (i != text.size() || whole_digits + frac_digits == 0) throw fail();
  for (std::size_t k = frac_digits; k < static_cast<std::size_t>(Decimal<void>::kDigits); ++k) {
    frac *= 10;
  }
  const std::int64_t raw = whole * Decimal<void>::kScale + frac;
  return negative ? -raw : raw;
}

std::string format_fixed(std::int64_t raw) {
  const bool negative = raw < 0;
  // Magnitude in unsigned space so INT64_MIN does not overflow.
  const std::uint64_t mag = negative ? 0ULL - static_cast<std::uint64_t>(raw)
                                     : static_cast<std::uint64_t>(raw);
  const auto scale = static_cast<std::uint64_t>(Decimal<void>::kScale);
  std::string out = negative ? "-" : "";
  out += std::to_string(mag / scale);
  std::uint64_t frac = mag % scale;
  if (frac != 0) {
    std::string digits(Decimal<void>::kDigits, '0');
    for (int k = Decimal<void>::kDigits - 1; k >= 0; --k) {
      digits[static_cast<std::size_t>(k)] = static_cast<char>('0' + frac % 10);
      frac /= 10;
    }
    while (!digits.empty() && digits.back() == '0') digits.pop_back();
    out += '.';
    out += digits;
  }
  return out;
}

std::int64_t round_fixed(double v) noexcept {
  return static_cast<std::int64_t>(std::llround(v * static_cast<double>(Decimal<void>::kScale)));
}

}  // namespace spoofdet::detail
