#include "spoofdet/windows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "spoofdet/binio.hpp"
#include "spoofdet/errors.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet {

namespace fs = std::filesystem;
using nlohmann::json;

void WindowConfig::validate() const {
  if (length == 0) throw UsageError("windows.length must be positive");
  if (stride == 0) throw UsageError("windows.stride must be positive");
  if (gap_ms < 0 || lookback_ms <= gap_ms) throw UsageError("windows: need 0 <= gap_ms < lookback_ms");
}

namespace {

Window gather(std::span<const FeatureFrame> frames, std::span<const FeatureVector> projected,
              std::size_t first, std::size_t count, std::size_t length) {
  Window w;
  w.x.resize(length * kFeatureCount);
  w.ts.resize(length);
  const std::size_t pad = length - count;
  for (std::size_t t = 0; t < length; ++t) {
    const std::size_t src = first + (t < pad ? 0 : t - pad);
    std::copy(projected[src].begin(), projected[src].end(), w.x.begin() + t * kFeatureCount);
    w.ts[t] = frames[src].ts;
  }
  return w;
}

std::vector<std::int64_t> sorted_t0(std::span<const SpoofingFlag> flags) {
  std::vector<std::int64_t> t0;
  t0.reserve(flags.size());
  for (const auto& f : flags) t0.push_back(f.t0);
  std::sort(t0.begin(), t0.end());
  return t0;
}

}  // namespace

PositiveWindows build_positive_windows(std::span<const FeatureFrame> frames,
                                       std::span<const FeatureVector> projected,
                                       std::span<const SpoofingFlag> flags, const WindowConfig& cfg,
                                       std::uint32_t source_id) {
  cfg.validate();
  if (projected.size() != frames.size()) throw std::invalid_argument("projected/frames size mismatch");
  PositiveWindows out;
  const auto ts_less = [](const FeatureFrame& f, std::int64_t v) { return f.ts < v; };
  const auto ts_greater = [](std::int64_t v, const FeatureFrame& f) { return v < f.ts; };
  for (const SpoofingFlag& flag : flags) {
    const std::int64_t lo = flag.t0 - cfg.lookback_ms;
    const std::int64_t hi = flag.t0 - cfg.gap_ms;
    const auto begin = std::lower_bound(frames.begin(), frames.end(), lo, ts_less);
    const auto end = std::upper_bound(begin, frames.end(), hi, ts_greater);
    const auto in_range = static_cast<std::size_t>(end - begin);
    if (in_range == 0) {
      ++out.dropped;
      continue;
    }
    const std::size_t count = std::min(in_range, cfg.length);
    const auto first = static_cast<std::size_t>(end - frames.begin()) - count;
    Window w = gather(frames, projected, first, count, cfg.length);
    w.label = 1;
    w.t0 = flag.t0;
    w.source_id = source_id;
    out.windows.push_back(std::move(w));
  }
  return out;
}

std::vector<Window> build_negative_windows(std::span<const FeatureFrame> frames,
                                           std::span<const FeatureVector> projected,
                                           std::span<const SpoofingFlag> flags,
                                           const WindowConfig& cfg, std::uint32_t source_id) {
  cfg.validate();
  if (projected.size() != frames.size()) throw std::invalid_argument("projected/frames size mismatch");
  std::vector<Window> out;
  if (frames.size() < cfg.length) return out;
  const auto t0s = sorted_t0(flags);
  for (std::size_t start = 0; start + cfg.length <= frames.size(); start += cfg.stride) {
    const std::int64_t first_ts = frames[start].ts;
    const std::int64_t last_ts = frames[start + cfg.length - 1].ts;
    // A flag at t0 disqualifies the window if t0 is within lookback after its
    // end, or if [t0 - lookback, t0] overlaps the window span; together this
    // is t0 in [first_ts, last_ts + lookback].
    const auto it = std::lower_bound(t0s.begin(), t0s.end(), first_ts);
    if (it != t0s.end() && *it <= last_ts + cfg.lookback_ms) continue;
    Window w = gather(frames, projected, start, cfg.length, cfg.length);
    w.label = 0;
    w.source_id = source_id;
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t count_negative_windows(std::span<const FeatureFrame> frames,
                                   std::span<const SpoofingFlag> flags, const WindowConfig& cfg) {
  cfg.validate();
  if (frames.size() < cfg.length) return 0;
  const auto t0s = sorted_t0(flags);
  std::size_t n = 0;
  for (std::size_t start = 0; start + cfg.length <= frames.size(); start += cfg.stride) {
    const std::int64_t first_ts = frames[start].ts;
    const std::int64_t last_ts = frames[start + cfg.length - 1].ts;
    const auto it = std::lower_bound(t0s.begin(), t0s.end(), first_ts);
    if (it != t0s.end() && *it <= last_ts + cfg.lookback_ms) continue;
    ++n;
  }
  return n;
}

std::array<std::size_t, 3> allocate_counts(std::size_t n, const SplitRatios& r) {
  const std::array<double, 3> ratio{r.train, r.val, r.test};
  const double sum = ratio[0] + ratio[1] + ratio[2];
  std::array<std::size_t, 3> out{};
  std::array<double, 3> rem{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = static_cast<double>(n) * ratio[i] / sum;
    // Guard against 0.65 * 100 landing at 64.999...
    const double fl = std::floor(exact + 1e-9);
    out[i] = static_cast<std::size_t>(fl);
    rem[i] = exact - fl;
    used += out[i];
  }
  while (used < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rem[i] > rem[best] + 1e-12) best = i;
    }
    ++out[best];
    rem[best] = -1.0;
    ++used;
  }
  return out;
}

DatasetSplit split_dataset(std::vector<Window> windows, std::uint64_t seed, const SplitRatios& ratios) {
  const auto totals = allocate_counts(windows.size(), ratios);
  if (totals[0] == 0 || totals[1] == 0 || totals[2] == 0) {
    throw DataError("split_dataset: " + std::to_string(windows.size()) +
                    " windows cannot fill train/val/test");
  }
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < windows.size(); ++i) (windows[i].label ? pos : neg).push_back(i);

  Rng rng(mix_seed(seed, 0x5B1D));
  stable_shuffle(pos, rng);
  stable_shuffle(neg, rng);

  auto pos_counts = allocate_counts(pos.size(), ratios);
  std::array<std::size_t, 3> neg_counts{};
  for (int i = 0; i < 3; ++i) {
    if (pos_counts[i] > totals[i]) pos_counts[i] = totals[i];
  }
  // Reconcile: whatever positives did not fit go to the split with room.
  std::size_t placed = pos_counts[0] + pos_counts[1] + pos_counts[2];
  for (int i = 0; i < 3 && placed < pos.size(); ++i) {
    const std::size_t room = totals[i] - pos_counts[i];
    const std::size_t add = std::min(room, pos.size() - placed);
    pos_counts[i] += add;
    placed += add;
  }
  for (int i = 0; i < 3; ++i) neg_counts[i] = totals[i] - pos_counts[i];

  DatasetSplit out;
  out.seed = seed;
  std::array<std::vector<Window>*, 3> dst{&out.train, &out.val, &out.test};
  std::size_t pi = 0;
  std::size_t ni = 0;
  for (int s = 0; s < 3; ++s) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < pos_counts[s]; ++k) members.push_back(pos[pi++]);
    for (std::size_t k = 0; k < neg_counts[s]; ++k) members.push_back(neg[ni++]);
    stable_shuffle(members, rng);
    dst[s]->reserve(members.size());
    for (std::size_t m : members) dst[s]->push_back(std::move(windows[m]));
  }
  return out;
}

DatasetSplit downsample_training(DatasetSplit split, std::uint64_t seed) {
  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < split.train.size(); ++i) (split.train[i].label ? pos : neg).push_back(i);
  if (pos.empty()) throw DataError("downsample_training: training split has no positive windows");
  if (neg.empty()) throw DataError("downsample_training: training split has no negative windows");

  auto& majority = neg.size() >= pos.size() ? neg : pos;
  const std::size_t keep = std::min(pos.size(), neg.size());
  Rng rng(mix_seed(seed, 0xD0C5));
  stable_shuffle(majority, rng);
  majority.resize(keep);

  std::vector<std::size_t> kept(pos);
  kept.insert(kept.end(), neg.begin(), neg.end());
  std::sort(kept.begin(), kept.end());
  std::vector<Window> train;
  train.reserve(kept.size());
  for (std::size_t i : kept) train.push_back(std::move(split.train[i]));
  split.train = std::move(train);
  return split;
}

LabelCounts count_labels(std::span<const Window> windows) noexcept {
  LabelCounts c;
  c.total = windows.size();
  for (const auto& w : windows) c.positives += w.label ? 1 : 0;
  return c;
}

BuiltDataset build_dataset(std::span<const FeatureFrame> frames, std::span<const SpoofingFlag> flags,
                           const WindowConfig& cfg, std::uint64_t seed, std::uint32_t source_id,
                           const SplitRatios& ratios) {
  const auto projected = project(frames);
  PositiveWindows pos = build_positive_windows(frames, projected, flags, cfg, source_id);
  if (pos.windows.empty()) throw DataError("dataset has no positive windows");
  std::vector<Window> all = std::move(pos.windows);
  auto neg = build_negative_windows(frames, projected, flags, cfg, source_id);
  all.insert(all.end(), std::make_move_iterator(neg.begin()), std::make_move_iterator(neg.end()));
  BuiltDataset out;
  out.overall = count_labels(all);
  out.dropped_flags = pos.dropped;
  out.split = downsample_training(split_dataset(std::move(all), seed, ratios), seed);
  return out;
}

NormStats NormStats::identity() noexcept {
  NormStats s;
  s.mean.fill(0.0);
  s.stddev.fill(1.0);
  return s;
}

NormStats compute_norm_stats(std::span<const Window> windows) {
  NormStats s;
  std::array<double, kFeatureCount> sum{};
  std::size_t n = 0;
  for (const auto& w : windows) {
    for (std::size_t t = 0; t < w.steps(); ++t) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) sum[f] += w.x[t * kFeatureCount + f];
    }
    n += w.steps();
  }
  if (n == 0) return NormStats::identity();
  for (std::size_t f = 0; f < kFeatureCount; ++f) s.mean[f] = sum[f] / static_cast<double>(n);
  std::array<double, kFeatureCount> ss{};
  for (const auto& w : windows) {
    for (std::size_t t = 0; t < w.steps(); ++t) {
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double d = w.x[t * kFeatureCount + f] - s.mean[f];
        ss[f] += d * d;
      }
    }
  }
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    const double sd = std::sqrt(ss[f] / static_cast<double>(n));
    s.stddev[f] = sd > 1e-12 * std::max(1.0, std::abs(s.mean[f])) ? sd : 1.0;
  }
  return s;
}

json norm_stats_to_json(const NormStats& s) {
  return json{{"mean", s.mean}, {"std", s.stddev}};
}

NormStats norm_stats_from_json(const json& j) {
  NormStats s;
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto sd = j.at("std").get<std::vector<double>>();
  if (mean.size() != kFeatureCount || sd.size() != kFeatureCount) {
    throw DataError("normalization stats must have " + std::to_string(kFeatureCount) + " entries");
  }
  std::copy(mean.begin(), mean.end(), s.mean.begin());
  std::copy(sd.begin(), sd.end(), s.stddev.begin());
  return s;
}

namespace {

constexpr const char* kSplitNames[3] = {"train", "val", "test"};

void write_split(const fs::path& dir, const char* name, const std::vector<Window>& ws) {
  std::ofstream x(dir / (std::string(name) + ".x.f64"), std::ios::binary);
  std::ofstream ts(dir / (std::string(name) + ".ts.i64"), std::ios::binary);
  std::ofstream meta(dir / (std::string(name) + ".meta.i64"), std::ios::binary);
  if (!x || !ts || !meta) throw DataError("cannot write archive split " + std::string(name));
  for (const Window& w : ws) {
    binio::put_f64s(x, w.x);
    for (std::int64_t t : w.ts) binio::put_i64(ts, t);
    binio::put_i64(meta, w.label);
    binio::put_i64(meta, w.t0 ? *w.t0 : std::numeric_limits<std::int64_t>::min());
    binio::put_i64(meta, w.source_id);
  }
}

std::vector<Window> read_split(const fs::path& dir, const char* name, std::size_t count,
                               std::size_t length) {
  std::ifstream x(dir / (std::string(name) + ".x.f64"), std::ios::binary);
  std::ifstream ts(dir / (std::string(name) + ".ts.i64"), std::ios::binary);
  std::ifstream meta(dir / (std::string(name) + ".meta.i64"), std::ios::binary);
  if (!x || !ts || !meta) throw DataError("cannot open archive split " + std::string(name));
  std::vector<Window> out(count);
  for (Window& w : out) {
    w.x.resize(length * kFeatureCount);
    binio::get_f64s(x, w.x);
    w.ts.resize(length);
    for (auto& t : w.ts) t = binio::get_i64(ts);
    w.label = static_cast<int>(binio::get_i64(meta));
    const std::int64_t t0 = binio::get_i64(meta);
    if (t0 != std::numeric_limits<std::int64_t>::min()) w.t0 = t0;
    w.source_id = static_cast<std::uint32_t>(binio::get_i64(meta));
  }
  return out;
}

json split_counts(const std::vector<Window>& ws) {
  const auto c = count_labels(ws);
  return json{{"positives", c.positives}, {"negatives", c.total - c.positives}, {"total", c.total}};
}

}  // namespace

void write_archive(const fs::path& dir, const DatasetSplit& split, const NormStats& norm,
                   const json& extra) {
  fs::create_directories(dir);
  const std::array<const std::vector<Window>*, 3> parts{&split.train, &split.val, &split.test};
  std::size_t length = 0;
  for (const auto* p : parts) {
    for (const Window& w : *p) {
      if (length == 0) length = w.steps();
      if (w.steps() != length) throw DataError("archive windows must share one length");
    }
  }
  json manifest = extra;
  manifest["format"] = "spoofdet-windows";
  manifest["format_version"] = 1;
  manifest["window_length"] = length;
  manifest["feature_count"] = kFeatureCount;
  manifest["features"] = {"mid",        "spread",     "delta_volume", "update_price",
                          "volatility", "cum_bid_25", "cum_ask_25"};
  manifest["seed"] = split.seed;
  manifest["normalization"] = norm_stats_to_json(norm);
  for (int i = 0; i < 3; ++i) {
    write_split(dir, kSplitNames[i], *parts[i]);
    manifest["splits"][kSplitNames[i]] = split_counts(*parts[i]);
  }
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) throw DataError("cannot write manifest in " + dir.string());
  m << manifest.dump(2) << '\n';
}

DatasetArchive read_archive(const fs::path& dir) {
  std::ifstream m(dir / "manifest.json");
  if (!m) throw DataError("no manifest.json in " + dir.string());
  DatasetArchive a;
  try {
    m >> a.manifest;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad archive manifest: ") + e.what());
  }
  const auto length = a.manifest.at("window_length").get<std::size_t>();
  if (a.manifest.at("feature_count").get<std::size_t>() != kFeatureCount) {
    throw DataError("archive feature count mismatch");
  }
  a.split.seed = a.manifest.at("seed").get<std::uint64_t>();
  a.norm = norm_stats_from_json(a.manifest.at("normalization"));
  std::array<std::vector<Window>*, 3> parts{&a.split.train, &a.split.val, &a.split.test};
  for (int i = 0; i < 3; ++i) {
    const auto count = a.manifest.at("splits").at(kSplitNames[i]).at("total").get<std::size_t>();
    *parts[i] = read_split(dir, kSplitNames[i], count, length);
  }
  return a;
}

}  // namespace spoofdet
