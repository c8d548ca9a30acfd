#include "spoofdet/orderbook.hpp"

#include <algorithm>
#include <functional>

namespace spoofdet {

namespace {

// Bids are stored ascending and asks descending, so in both cases the
// touch sits at the back of the vector.
template <class Cmp>
std::vector<Level>::iterator find_slot(std::vector<Level>& side, Price p, Cmp cmp) {
  return std::lower_bound(side.begin(), side.end(), p,
                          [&](const Level& l, Price v) { return cmp(l.price, v); });
}

template <class Cmp>
std::vector<Level>::const_iterator find_slot(const std::vector<Level>& side, Price p, Cmp cmp) {
  return std::lower_bound(side.begin(), side.end(), p,
                          [&](const Level& l, Price v) { return cmp(l.price, v); });
}

template <class Cmp>
UpdateEffect apply_side(std::vector<Level>& side, Price price, Volume size, Cmp cmp,
                        BookAnomalies& anomalies) {
  UpdateEffect eff;
  auto it = find_slot(side, price, cmp);
  const bool present = it != side.end() && it->price == price;
  const Volume old = present ? it->size : Volume{};
  eff.old_size = old;
  eff.delta_volume = size - old;
  eff.cancelled_volume = old > size ? old - size : Volume{};

  if (!present) {
    if (size.is_zero()) {
      ++anomalies.zero_size_on_absent_level;
      eff.kind = EffectKind::None;
      return eff;
    }
    side.insert(it, Level{price, size});
    eff.kind = EffectKind::Added;
    return eff;
  }
  if (size.is_zero()) {
    side.erase(it);
    eff.kind = EffectKind::Removed;
  } else {
    it->size = size;
    if (size > old) {
      eff.kind = EffectKind::Increased;
    } else if (size < old) {
      eff.kind = EffectKind::Decreased;
    } else {
      eff.kind = EffectKind::None;
    }
  }
  return eff;
}

Volume sum_top(const std::vector<Level>& side, std::size_t depth) noexcept {
  const std::size_t n = std::min(depth, side.size());
  Volume total;
  for (std::size_t i = side.size() - n; i < side.size(); ++i) total += side[i].size;
  return total;
}

}  // namespace

UpdateEffect OrderBook::apply(const L2Update& u) {
  UpdateEffect eff = u.side == Side::Bid
                         ? apply_side(bids_, u.price, u.size, std::less<Price>{}, anomalies_)
                         : apply_side(asks_, u.price, u.size, std::greater<Price>{}, anomalies_);
  if (!bids_.empty() && !asks_.empty() && bids_.back().price >= asks_.back().price) {
    ++anomalies_.crossed_after_update;
  }
  return eff;
}

void OrderBook::load_snapshot(const BookSnapshot& snap) {
  clear();
  for (const Level& l : snap.bids) {
    if (l.size.positive()) apply(L2Update{0, snap.ts, Side::Bid, l.price, l.size});
  }
  for (const Level& l : snap.asks) {
    if (l.size.positive()) apply(L2Update{0, snap.ts, Side::Ask, l.price, l.size});
  }
}

void OrderBook::clear() noexcept {
  bids_.clear();
  asks_.clear();
  anomalies_ = {};
}

std::optional<Price> OrderBook::best_bid() const noexcept {
  if (bids_.empty()) return std::nullopt;
  return bids_.back().price;
}

std::optional<Price> OrderBook::best_ask() const noexcept {
  if (asks_.empty()) return std::nullopt;
  return asks_.back().price;
}

Volume OrderBook::cumulative_volume(Side s, std::size_t depth) const noexcept {
  return sum_top(side_levels(s), depth);
}

Volume OrderBook::level_size(Side s, Price p) const noexcept {
  const auto& side = side_levels(s);
  auto it = s == Side::Bid ? find_slot(side, p, std::less<Price>{})
                           : find_slot(side, p, std::greater<Price>{});
  if (it != side.end() && it->price == p) return it->size;
  return {};
}

std::vector<Level> OrderBook::levels(Side s) const {
  const auto& side = side_levels(s);
  return {side.rbegin(), side.rend()};
}

TopOfBook top_of_book(const OrderBook& book) noexcept {
  return {book.best_bid(), book.best_ask()};
}

std::optional<double> mid_price(const OrderBook& book) noexcept {
  const auto bb = book.best_bid();
  const auto ba = book.best_ask();
  if (!bb || !ba) return std::nullopt;
  return static_cast<double>(bb->raw() + ba->raw()) * 0.5 / static_cast<double>(Price::kScale);
}

}  // namespace spoofdet
