#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "spoofdet/decimal.hpp"

namespace spoofdet {

enum class Side : std::uint8_t { Bid = 0, Ask = 1 };

constexpr std::string_view to_string(Side s) noexcept { return s == Side::Bid ? "bid" : "ask"; }
constexpr Side opposite(Side s) noexcept { return s == Side::Bid ? Side::Ask : Side::Bid; }

/// One price-level change. `size` is the absolute level size after the
/// update; zero removes the level.
struct L2Update {
  std::int64_t seq = 0;
  std::int64_t ts = 0;  // milliseconds since epoch
  Side side = Side::Bid;
  Price price;
  Volume size;

  friend bool operator==(const L2Update&, const L2Update&) = default;
};

struct Level {
  Price price;
  Volume size;
  friend bool operator==(const Level&, const Level&) = default;
};

/// Full-depth boot image accepted at the head of a stream.
struct BookSnapshot {
  std::int64_t ts = 0;
  std::vector<Level> bids;
  std::vector<Level> asks;
};

enum class EffectKind : std::uint8_t { None, Added, Increased, Decreased, Removed };

struct UpdateEffect {
  EffectKind kind = EffectKind::None;
  Volume delta_volume;      // new - old
  Volume cancelled_volume;  // max(0, old - new)
  Volume old_size;
};

struct BookAnomalies {
  std::uint64_t zero_size_on_absent_level = 0;
  std::uint64_t crossed_after_update = 0;
  friend bool operator==(const BookAnomalies&, const BookAnomalies&) = default;
};

inline constexpr std::size_t kDefaultDepth = 25;

/// Aggregated L2 book. Each side is a sorted flat array with the touch at
/// the back, so touch-level churn is O(1) and the top-N levels are
/// contiguous. Full depth is kept; depth caps apply only at query time.
class OrderBook {
 public:
  UpdateEffect apply(const L2Update& u);
  void load_snapshot(const BookSnapshot& snap);
  void clear() noexcept;

  std::optional<Price> best_bid() const noexcept;
  std::optional<Price> best_ask() const noexcept;
  std::optional<Price> touch(Side s) const noexcept {
    return s == Side::Bid ? best_bid() : best_ask();
  }

  Volume cumulative_volume(Side s, std::size_t depth = kDefaultDepth) const noexcept;
  Volume level_size(Side s, Price p) const noexcept;
  std::size_t level_count(Side s) const noexcept { return side_levels(s).size(); }

  // Best-first copy of one side; for dumps and tests.
  std::vector<Level> levels(Side s) const;

  const BookAnomalies& anomalies() const noexcept { return anomalies_; }

  bool operator==(const OrderBook& o) const noexcept {
    return bids_ == o.bids_ && asks_ == o.asks_;
  }

 private:
  const std::vector<Level>& side_levels(Side s) const noexcept {
    return s == Side::Bid ? bids_ : asks_;
  }

  std::vector<Level> bids_;  // ascending price, best bid at back
  std::vector<Level> asks_;  // descending price, best ask at back
  BookAnomalies anomalies_;
};

struct TopOfBook {
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
};

TopOfBook top_of_book(const OrderBook& book) noexcept;

/// (best_bid + best_ask) / 2 when both sides are present.
std::optional<double> mid_price(const OrderBook& book) noexcept;

inline Volume cumulative_volume(const OrderBook& book, Side s, std::size_t depth = kDefaultDepth) {
  return book.cumulative_volume(s, depth);
}

}  // namespace spoofdet
