#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spoofdet/features.hpp"

namespace spoofdet {

struct Thresholds {
  double t1 = 0.25;   // cancelled volume / same-side top-25 depth before the cancel
  double t2 = 0.01;   // max relative distance to the same-side touch
  double t3 = 0.5;    // min volatility variation after the cancel
  std::int64_t horizon_ms = 2000;

  void validate() const;
};

struct ConditionSet {
  bool volume = false;    // condition 1
  bool distance = false;  // condition 2
  bool volatility = false;  // condition 3
  bool all() const noexcept { return volume && distance && volatility; }
  friend bool operator==(const ConditionSet&, const ConditionSet&) = default;
};

struct SpoofingFlag {
  std::int64_t t0 = 0;
  std::size_t frame_index = 0;
  Side side = Side::Bid;
  Price price;
  Volume cancelled_volume;
  ConditionSet conditions;
  friend bool operator==(const SpoofingFlag&, const SpoofingFlag&) = default;
};

/// Evaluates the three spoofing conditions on one cancellation frame.
/// `pre_cancel_depth` is the same-side top-25 volume before the update
/// was applied. Throws std::invalid_argument when the frame carries no
/// cancelled volume or is not labelable.
ConditionSet evaluate_conditions(const FeatureFrame& frame, Volume pre_cancel_depth,
                                 double future_dsigma, const Thresholds& th);

/// Max vol_variation over the frames strictly after `index` whose ts lies in
/// (ts, ts + horizon]. Horizon 0 returns the frame's own value; returns
/// -infinity when no later frame falls in the horizon.
double future_vol_variation(std::span<const FeatureFrame> frames, std::size_t index,
                            std::int64_t horizon_ms);

/// One flag per labelable cancellation frame meeting all three conditions.
std::vector<SpoofingFlag> flag_spoofing(std::span<const FeatureFrame> frames, const Thresholds& th);

// {"t0":..,"side":"bid","price":"..","cancelled_volume":"..","c":[true,true,true]}
std::string format_flag_json(const SpoofingFlag& f);
void write_flags(std::ostream& out, std::span<const SpoofingFlag> flags);
void write_flags(const std::filesystem::path& path, std::span<const SpoofingFlag> flags);
// frame_index is not part of the wire format and reads back as 0.
std::vector<SpoofingFlag> read_flags(std::istream& in);
std::vector<SpoofingFlag> read_flags(const std::filesystem::path& path);

}  // namespace spoofdet
