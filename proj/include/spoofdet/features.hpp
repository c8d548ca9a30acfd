#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "spoofdet/ingest.hpp"
#include "spoofdet/orderbook.hpp"

namespace spoofdet {

__extension__ using Int128 = __int128;

/// Per-update signals. best_bid/best_ask/distance are absent when the
/// book cannot supply them; such frames are not used for labelling.
struct FeatureFrame {
  std::int64_t ts = 0;
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
  Volume delta_volume;
  Price update_price;
  double volatility = 0.0;
  double vol_variation = 0.0;
  Volume cum_bid_25;
  Volume cum_ask_25;
  std::optional<double> distance;
  Volume cancelled_volume;
  Side side = Side::Bid;

  bool labelable() const noexcept { return best_bid && best_ask && distance; }
  friend bool operator==(const FeatureFrame&, const FeatureFrame&) = default;
};

/// Rolling population standard deviation of the mid price and its relative
/// change over a fixed lag. Mids are held as 2*mid in fixed-point units so
/// the running moments are exact integers.
class VolatilityState {
 public:
  static constexpr double kEpsilon = 1e-12;

  explicit VolatilityState(std::size_t window = 100, std::size_t lag = 20);

  // Appends a mid observation and returns the new sigma.
  double update(double mid);
  double update_twice_mid_raw(std::int64_t twice_mid_raw);

  double sigma() const noexcept { return sigma_hist_.empty() ? 0.0 : sigma_hist_.back(); }
  // (sigma_t - sigma_{t-k}) / max(sigma_{t-k}, eps); uses the oldest stored
  // sigma while fewer than k+1 are available. Zero before any observation.
  double variation() const noexcept;

  std::size_t window() const noexcept { return window_; }
  std::size_t lag() const noexcept { return lag_; }
  std::size_t count() const noexcept { return mids_.size(); }
  std::span<const double> sigma_history() const noexcept { return sigma_hist_; }

 private:
  std::size_t window_;
  std::size_t lag_;
  std::vector<std::int64_t> mids_;  // ring, capacity window_
  std::size_t head_ = 0;
  std::int64_t sum_ = 0;
  Int128 sum_sq_ = 0;
  std::vector<double> sigma_hist_;  // last lag_+1 sigmas, oldest first
};

struct FeatureConfig {
  std::size_t depth = kDefaultDepth;
  std::size_t vol_window = 100;
  std::size_t vol_lag = 20;
};

/// |price - touch(side)| / touch(side); absent when that side is empty.
std::optional<double> distance_to_touch(const OrderBook& book, Side side, Price price) noexcept;

/// Builds the frame for `u`. The book must already reflect `u`; the
/// volatility state is advanced when a mid exists, carried forward otherwise.
FeatureFrame extract_frame(const OrderBook& book, const L2Update& u, const UpdateEffect& effect,
                           VolatilityState& vstate, std::size_t depth = kDefaultDepth);

/// Book + volatility state driven one update at a time.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig cfg = {});

  void load_snapshot(const BookSnapshot& snap) { book_.load_snapshot(snap); }
  FeatureFrame push(const L2Update& u);

  const OrderBook& book() const noexcept { return book_; }
  const VolatilityState& volatility() const noexcept { return vstate_; }

 private:
  FeatureConfig cfg_;
  OrderBook book_;
  VolatilityState vstate_;
};

struct ReplayResult {
  std::vector<FeatureFrame> frames;
  BookAnomalies anomalies;
};

ReplayResult replay(const UpdateStream& stream, const FeatureConfig& cfg = {});

// Classifier input: mid, spread, delta volume, update price, volatility,
// cumulative bid volume, cumulative ask volume.
inline constexpr std::size_t kFeatureCount = 7;
using FeatureVector = std::array<double, kFeatureCount>;

/// Projects frames to classifier inputs. Mid and spread are carried forward
/// over frames where one side of the book is empty.
std::vector<FeatureVector> project(std::span<const FeatureFrame> frames);

// Columnar dump with a fixed 12-column header; absent values are empty.
void write_frames_csv(std::ostream& out, std::span<const FeatureFrame> frames);
inline constexpr const char* kFrameCsvHeader =
    "ts,side,best_bid,best_ask,delta_volume,update_price,volatility,vol_variation,"
    "cum_bid_25,cum_ask_25,distance,cancelled_volume";

}  // namespace spoofdet
