#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spoofdet/features.hpp"
#include "spoofdet/ingest.hpp"
#include "spoofdet/labeller.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet {

/// One injected spoof: place a large order near the touch, hold it, cancel
/// it, then (if drift > 0) push the mid in the spoofer's favour.
struct SpoofSpec {
  std::int64_t start_ms = 0;        // placement time, relative to stream start
  Side side = Side::Bid;
  double volume_multiplier = 1.0;   // order size / same-side top-25 depth at placement
  double volume = 0.0;              // absolute size override when > 0
  double distance = 0.001;          // relative distance from the same-side touch
  std::int64_t hold_ms = 3000;
  double drift = 0.001;             // relative mid move after the cancel; 0 = unsuccessful spoof
  std::int64_t drift_ms = 1500;

  bool successful() const noexcept { return drift > 0.0; }
  std::int64_t cancel_ms() const noexcept { return start_ms + hold_ms; }
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::int64_t start_ts = 1583712000000;  // 2020-03-09T00:00:00Z
  std::int64_t duration_ms = 600000;
  double mean_interval_ms = 30.0;
  double base_price = 200.0;
  double tick = 0.01;
  double move_prob = 0.04;      // per step probability of shifting the touch
  double reversion = 0.002;     // pull toward base_price per tick of displacement
  int max_spread_ticks = 4;
  double spread_prob = 0.02;    // per step probability of a spread change
  double size_median = 10.0;
  double size_sigma = 0.6;
  double size_cap = 4.0;        // sizes clamped to [median/20, cap * median]
  std::size_t depth_levels = 40;
  std::int64_t freeze_ms = 2500;  // touch held still after an unsuccessful cancel
  std::int64_t settle_ms = 500;   // tail of each episode segment after drift or freeze
  std::vector<SpoofSpec> spoofs;
  std::vector<std::uint32_t> segment_salts;  // re-roll counters, one per segment
  std::uint64_t seed = 1;

  /// Checks the schedule (sorted, episodes disjoint, spoofs inside the
  /// stream) and, when thresholds are given, that every spoof is
  /// parameterised to exceed t1 and sit within t2.
  void validate() const;
  void validate(const Thresholds& th) const;
};

enum class Provenance : std::uint8_t { Background, SpoofPlace, SpoofCancel, Drift };

struct InjectedSpoof {
  std::size_t spec_index = 0;
  std::int64_t t0 = 0;  // cancel timestamp
  Side side = Side::Bid;
  Price price;
  Volume volume;
  bool successful = true;
  std::size_t place_index = 0;   // update index of the placement
  std::size_t cancel_index = 0;  // update index of the cancellation
};

struct GroundTruth {
  std::vector<InjectedSpoof> spoofs;
  std::vector<Provenance> provenance;  // one per update
  std::vector<std::uint32_t> segment;  // generation segment per update

  std::vector<std::int64_t> expected_t0() const;  // successful spoofs only
};

struct GeneratedStream {
  UpdateStream stream;
  GroundTruth truth;
};

/// Deterministic in cfg (including seed and salts). Throws UsageError on an
/// invalid schedule.
GeneratedStream generate_stream(const ScenarioConfig& cfg);

struct VerifyReport {
  std::vector<std::size_t> missed;          // successful spoofs without a flag
  std::vector<std::size_t> flagged_unsuccessful;
  std::vector<std::size_t> background_flags;  // frame indices flagged outside the truth
  bool exact() const noexcept {
    return missed.empty() && flagged_unsuccessful.empty() && background_flags.empty();
  }
};

VerifyReport verify_against_labeller(const GeneratedStream& g, const std::vector<SpoofingFlag>& flags);

/// Generates, labels and re-rolls offending segments (raising drift or
/// size where a successful spoof fell short) until the labeller's flag set
/// equals the ground truth. Returns the adjusted config with its stream.
struct CalibratedStream {
  ScenarioConfig config;
  GeneratedStream generated;
  std::vector<SpoofingFlag> flags;
  std::vector<FeatureFrame> frames;
  std::size_t rounds = 0;
};

CalibratedStream generate_verified(ScenarioConfig cfg, const Thresholds& th,
                                   const FeatureConfig& fcfg = {}, std::size_t max_rounds = 60);

struct BenchmarkSample {
  std::string name;
  double target_frequency = 0.0;
  CalibratedStream data;
  std::size_t positive_windows = 0;
  std::size_t negative_windows = 0;
  double frequency() const noexcept {
    const auto total = positive_windows + negative_windows;
    return total ? static_cast<double>(positive_windows) / static_cast<double>(total) : 0.0;
  }
};

inline constexpr std::array<double, 4> kBenchmarkFrequencies{0.011, 0.012, 0.048, 0.012};

/// Four scenarios that differ in spoof style, event length and update rate,
/// with episode spacing tuned so the positive-window frequency lands on
/// kBenchmarkFrequencies. `scale` shrinks the number of episodes for quick runs.
std::vector<BenchmarkSample> make_benchmark_suite(std::uint64_t master_seed, const Thresholds& th,
                                                  const WindowConfig& wcfg = {},
                                                  const FeatureConfig& fcfg = {}, double scale = 1.0);

/// Single sample from the suite (index 0..3).
BenchmarkSample make_benchmark_sample(std::size_t index, std::uint64_t master_seed, const Thresholds& th,
                                      const WindowConfig& wcfg = {}, const FeatureConfig& fcfg = {},
                                      double scale = 1.0);

nlohmann::json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);  // rejects unknown keys
nlohmann::json truth_to_json(const GroundTruth& truth);

}  // namespace spoofdet
