#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "spoofdet/features.hpp"
#include "spoofdet/labeller.hpp"

namespace spoofdet {

struct WindowConfig {
  std::size_t length = 200;
  std::int64_t lookback_ms = 12000;  // window membership starts at t0 - lookback
  std::int64_t gap_ms = 2000;        // and ends at t0 - gap
  std::size_t stride = 50;           // negative sliding-window stride, in frames

  void validate() const;
};

/// Fixed-length sequence of projected feature vectors. Values are raw;
/// normalization is applied by the model that consumes them.
struct Window {
  std::vector<double> x;        // length * kFeatureCount, step-major
  std::vector<std::int64_t> ts;  // per step
  int label = 0;
  std::optional<std::int64_t> t0;
  std::uint32_t source_id = 0;

  std::size_t steps() const noexcept { return ts.size(); }
  std::span<const double> step(std::size_t t) const noexcept {
    return {x.data() + t * kFeatureCount, kFeatureCount};
  }
  friend bool operator==(const Window&, const Window&) = default;
};

struct PositiveWindows {
  std::vector<Window> windows;
  std::size_t dropped = 0;  // flags whose interval held no frames
};

PositiveWindows build_positive_windows(std::span<const FeatureFrame> frames,
                                       std::span<const FeatureVector> projected,
                                       std::span<const SpoofingFlag> flags, const WindowConfig& cfg,
                                       std::uint32_t source_id = 0);

std::vector<Window> build_negative_windows(std::span<const FeatureFrame> frames,
                                           std::span<const FeatureVector> projected,
                                           std::span<const SpoofingFlag> flags,
                                           const WindowConfig& cfg, std::uint32_t source_id = 0);

/// Number of windows build_negative_windows would produce, without building them.
std::size_t count_negative_windows(std::span<const FeatureFrame> frames,
                                   std::span<const SpoofingFlag> flags, const WindowConfig& cfg);

struct SplitRatios {
  double train = 0.65;
  double val = 0.15;
  double test = 0.20;
};

struct DatasetSplit {
  std::vector<Window> train;
  std::vector<Window> val;
  std::vector<Window> test;
  std::uint64_t seed = 0;
};

/// Largest-remainder allocation of n items over the three ratios.
std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& r);

/// Seeded, label-stratified split. Throws DataError if a split would be empty.
DatasetSplit split_dataset(std::vector<Window> windows, std::uint64_t seed,
                           const SplitRatios& ratios = {});

/// Randomly drops majority-class training windows to reach a 1:1 ratio.
/// Validation and test are untouched. Throws DataError without positives.
DatasetSplit downsample_training(DatasetSplit split, std::uint64_t seed);

struct LabelCounts {
  std::size_t positives = 0;
  std::size_t total = 0;
};
LabelCounts count_labels(std::span<const Window> windows) noexcept;

/// Positive + negative windows of one labelled stream, split with `seed`
/// and with the training split down-sampled to balance.
struct BuiltDataset {
  DatasetSplit split;
  LabelCounts overall;       // before down-sampling
  std::size_t dropped_flags = 0;
};

BuiltDataset build_dataset(std::span<const FeatureFrame> frames, std::span<const SpoofingFlag> flags,
                           const WindowConfig& cfg, std::uint64_t seed, std::uint32_t source_id = 0,
                           const SplitRatios& ratios = {});

struct NormStats {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};

  static NormStats identity() noexcept;
  friend bool operator==(const NormStats&, const NormStats&) = default;
};

/// Per-feature mean / population std over every step of `windows`;
/// degenerate features get unit scale.
NormStats compute_norm_stats(std::span<const Window> windows);

nlohmann::json norm_stats_to_json(const NormStats& s);
NormStats norm_stats_from_json(const nlohmann::json& j);

struct DatasetArchive {
  DatasetSplit split;
  NormStats norm;
  nlohmann::json manifest;
};

// Directory layout: manifest.json plus, per split, <split>.x.f64 (n x L x F),
// <split>.ts.i64 (n x L) and <split>.meta.i64 (n x 3: label, t0 or INT64_MIN,
// source_id), all little-endian. `extra` is merged into the manifest.
void write_archive(const std::filesystem::path& dir, const DatasetSplit& split,
                   const NormStats& norm, const nlohmann::json& extra);
DatasetArchive read_archive(const std::filesystem::path& dir);

}  // namespace spoofdet
