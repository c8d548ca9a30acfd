#include <gtest/gtest.h>

#include <filesystem>

#include "spoofdet/errors.hpp"
#include "spoofdet/windows.hpp"
#include "support.hpp"

using namespace spoofdet;

namespace {

// Frames carrying only timestamps; projected row i holds i in every column
// so window contents identify their source frames.
struct Timeline {
  std::vector<FeatureFrame> frames;
  std::vector<FeatureVector> projected;

  explicit Timeline(const std::vector<std::int64_t>& ts) {
    for (std::size_t i = 0; i < ts.size(); ++i) {
      FeatureFrame f;
      f.ts = ts[i];
      frames.push_back(f);
      FeatureVector v;
      v.fill(static_cast<double>(i));
      projected.push_back(v);
    }
  }
};

std::vector<std::int64_t> regular(std::size_t n, std::int64_t step, std::int64_t start = 0) {
  std::vector<std::int64_t> ts(n);
  for (std::size_t i = 0; i < n; ++i) ts[i] = start + static_cast<std::int64_t>(i) * step;
  return ts;
}

SpoofingFlag flag_at(std::int64_t t0) {
  SpoofingFlag f;
  f.t0 = t0;
  return f;
}

std::vector<Window> labelled(std::size_t pos, std::size_t neg) {
  std::vector<Window> out;
  for (std::size_t i = 0; i < pos + neg; ++i) {
    Window w;
    w.x.assign(2 * kFeatureCount, static_cast<double>(i));
    w.ts = {static_cast<std::int64_t>(i), static_cast<std::int64_t>(i)};
    w.label = i < pos ? 1 : 0;
    out.push_back(w);
  }
  return out;
}

}  // namespace

TEST(PositiveWindows, TakesLatestFramesBeforeGap) {
  const Timeline tl(regular(3000, 10));
  const WindowConfig cfg;
  const auto pos = build_positive_windows(tl.frames, tl.projected, std::vector{flag_at(20000)}, cfg);
  ASSERT_EQ(pos.windows.size(), 1u);
  const Window& w = pos.windows[0];
  ASSERT_EQ(w.steps(), 200u);
  EXPECT_EQ(w.ts.back(), 18000);   // t0 - gap
  EXPECT_EQ(w.ts.front(), 16010);  // 200 frames back
  EXPECT_EQ(w.step(199)[0], 1800.0);
  EXPECT_EQ(w.label, 1);
  EXPECT_EQ(w.t0, 20000);
}

TEST(PositiveWindows, LeftPadsShortIntervals) {
  // 150 frames in [t0-12000, t0-2000], a few outside it.
  std::vector<std::int64_t> ts{0, 10};
  for (int i = 0; i < 150; ++i) ts.push_back(20000 + i * 60);
  ts.push_back(29950);
  const Timeline tl(ts);
  const auto pos = build_positive_windows(tl.frames, tl.projected, std::vector{flag_at(31000)}, {});
  ASSERT_EQ(pos.windows.size(), 1u);
  const Window& w = pos.windows[0];
  for (std::size_t t = 0; t <= 50; ++t) EXPECT_EQ(w.step(t)[0], 2.0) << t;
  EXPECT_EQ(w.step(51)[0], 3.0);
  EXPECT_EQ(w.step(199)[0], 151.0);
  EXPECT_EQ(w.ts.front(), 20000);
}

TEST(PositiveWindows, DropsFlagsWithEmptyInterval) {
  const Timeline tl(regular(100, 10));
  const auto pos = build_positive_windows(tl.frames, tl.projected,
                                          std::vector{flag_at(500), flag_at(20000)}, {});
  EXPECT_EQ(pos.windows.size(), 0u);
  EXPECT_EQ(pos.dropped, 2u);
}

// Randomised timelines: every positive window matches a direct filter of
// the frames, and no step comes within the gap of t0.
TEST(PositiveWindowsProperty, MatchesPredicateOracle) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::int64_t> ts;
    std::int64_t t = 0;
    for (int i = 0; i < 5000; ++i) {
      t += static_cast<std::int64_t>(uniform01(rng) * (rep % 2 ? 200.0 : 20.0));
      ts.push_back(t);
    }
    const Timeline tl(ts);
    std::vector<SpoofingFlag> flags;
    for (int k = 0; k < 10; ++k) flags.push_back(flag_at(static_cast<std::int64_t>(uniform01(rng) * t)));
    const WindowConfig cfg;
    const auto pos = build_positive_windows(tl.frames, tl.projected, flags, cfg);
    std::size_t wi = 0;
    for (const auto& f : flags) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts[i] >= f.t0 - cfg.lookback_ms && ts[i] <= f.t0 - cfg.gap_ms) members.push_back(i);
      }
      if (members.empty()) continue;
      if (members.size() > cfg.length) members.erase(members.begin(), members.end() - cfg.length);
      ASSERT_LT(wi, pos.windows.size());
      const Window& w = pos.windows[wi++];
      const std::size_t pad = cfg.length - members.size();
      for (std::size_t s = 0; s < cfg.length; ++s) {
        const std::size_t src = members[s < pad ? 0 : s - pad];
        ASSERT_EQ(w.step(s)[0], static_cast<double>(src));
        ASSERT_LE(w.ts[s], f.t0 - cfg.gap_ms);
      }
    }
    EXPECT_EQ(wi, pos.windows.size());
    EXPECT_EQ(wi + pos.dropped, flags.size());
  }
}

TEST(NegativeWindows, CountWithoutFlags) {
  for (std::size_t n : {199u, 200u, 249u, 250u, 1000u, 1234u}) {
    const Timeline tl(regular(n, 10));
    const auto neg = build_negative_windows(tl.frames, tl.projected, {}, {});
    const std::size_t expected = n < 200 ? 0 : (n - 200) / 50 + 1;
    EXPECT_EQ(neg.size(), expected) << n;
    EXPECT_EQ(count_negative_windows(tl.frames, {}, {}), expected);
    for (std::size_t k = 0; k < neg.size(); ++k) {
      EXPECT_EQ(neg[k].step(0)[0], static_cast<double>(k * 50));
      EXPECT_EQ(neg[k].label, 0);
      EXPECT_FALSE(neg[k].t0);
    }
  }
}

TEST(NegativeWindows, DenseFlagsExcludeEverything) {
  const Timeline tl(regular(2000, 10));
  std::vector<SpoofingFlag> flags;
  for (std::int64_t t = 0; t < 20000; t += 1000) flags.push_back(flag_at(t));
  EXPECT_TRUE(build_negative_windows(tl.frames, tl.projected, flags, {}).empty());
}

// Exclusion oracle: a window is rejected when any labelled interval
// [t0 - lookback, t0] intersects it, or t0 lands within lookback after it.
TEST(NegativeWindowsProperty, OverlapOracle) {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const Timeline tl(regular(20000, 1 + rep % 4));
    const std::int64_t end = tl.frames.back().ts;
    std::vector<SpoofingFlag> flags;
    for (int k = 0; k < 3 + rep % 3; ++k) {
      flags.push_back(flag_at(static_cast<std::int64_t>(uniform01(rng) * (end + 20000)) - 10000));
    }
    const WindowConfig cfg;
    const auto neg = build_negative_windows(tl.frames, tl.projected, flags, cfg);
    std::vector<double> expected_starts;
    for (std::size_t s = 0; s + cfg.length <= tl.frames.size(); s += cfg.stride) {
      const auto a = tl.frames[s].ts;
      const auto b = tl.frames[s + cfg.length - 1].ts;
      bool excluded = false;
      for (const auto& f : flags) {
        const bool overlaps = f.t0 - cfg.lookback_ms <= b && f.t0 >= a;
        const bool soon_after = f.t0 > b && f.t0 <= b + cfg.lookback_ms;
        excluded = excluded || overlaps || soon_after;
      }
      if (!excluded) expected_starts.push_back(static_cast<double>(s));
    }
    ASSERT_EQ(neg.size(), expected_starts.size());
    for (std::size_t k = 0; k < neg.size(); ++k) ASSERT_EQ(neg[k].step(0)[0], expected_starts[k]);
    EXPECT_EQ(count_negative_windows(tl.frames, flags, cfg), neg.size());
  }
}

TEST(Split, AllocatesLargestRemainder) {
  EXPECT_EQ(allocate_counts(100, {}), (std::array<std::size_t, 3>{65, 15, 20}));
  EXPECT_EQ(allocate_counts(29, {}), (std::array<std::size_t, 3>{19, 4, 6}));
  EXPECT_EQ(allocate_counts(1521, {}), (std::array<std::size_t, 3>{989, 228, 304}));
  EXPECT_EQ(allocate_counts(0, {}), (std::array<std::size_t, 3>{0, 0, 0}));
}

TEST(Split, StratifiedSizes) {
  const auto split = split_dataset(labelled(29, 1492), 11);
  EXPECT_EQ(split.train.size(), 989u);
  EXPECT_EQ(split.val.size(), 228u);
  EXPECT_EQ(split.test.size(), 304u);
  EXPECT_EQ(count_labels(split.train).positives, 19u);
  EXPECT_EQ(count_labels(split.val).positives, 4u);
  EXPECT_EQ(count_labels(split.test).positives, 6u);
  std::vector<double> ids;
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (const auto& w : *part) ids.push_back(w.x[0]);
  }
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) ASSERT_EQ(ids[i], static_cast<double>(i));
}

TEST(Split, DeterministicInSeed) {
  const auto a = split_dataset(labelled(20, 300), 5);
  const auto b = split_dataset(labelled(20, 300), 5);
  const auto c = split_dataset(labelled(20, 300), 6);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, c.train);
}

TEST(Split, RejectsTooFewWindows) {
  EXPECT_THROW(split_dataset(labelled(1, 1), 1), DataError);
}

TEST(Downsample, BalancesMajorityOnly) {
  DatasetSplit s;
  s.train = labelled(44, 88);
  s.val = labelled(1, 7);
  s.test = labelled(2, 9);
  const auto d = downsample_training(s, 3);
  EXPECT_EQ(count_labels(d.train).positives, 44u);
  EXPECT_EQ(d.train.size(), 88u);
  EXPECT_EQ(d.val, s.val);
  EXPECT_EQ(d.test, s.test);

  s.train = labelled(10, 10);
  EXPECT_EQ(downsample_training(s, 3).train, s.train);

  s.train = labelled(30, 10);
  const auto m = downsample_training(s, 3);
  EXPECT_EQ(count_labels(m.train).positives, 10u);
  EXPECT_EQ(m.train.size(), 20u);

  s.train = labelled(0, 10);
  EXPECT_THROW(downsample_training(s, 3), DataError);
}

TEST(NormStats, MatchesDirectComputation) {
  auto ws = labelled(3, 4);
  for (auto& w : ws) {
    w.x[1] = 5.0;  // constant column
    w.x[kFeatureCount + 1] = 5.0;
  }
  const auto s = compute_norm_stats(ws);
  std::vector<double> col;
  for (const auto& w : ws) {
    col.push_back(w.x[0]);
    col.push_back(w.x[kFeatureCount]);
  }
  double mean = 0.0;
  for (double v : col) mean += v;
  mean /= static_cast<double>(col.size());
  EXPECT_NEAR(s.mean[0], mean, 1e-12);
  EXPECT_NEAR(s.stddev[0], spoofdet::testing::direct_std(col), 1e-12);
  EXPECT_EQ(s.stddev[1], 1.0);
  EXPECT_EQ(norm_stats_from_json(norm_stats_to_json(s)), s);
}

TEST(Archive, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "spoofdet_archive_test";
  std::filesystem::remove_all(dir);
  auto split = split_dataset(labelled(20, 80), 9);
  split.train[0].t0 = 12345;
  split.train[0].source_id = 3;
  const auto norm = compute_norm_stats(split.train);
  write_archive(dir, split, norm, {{"note", "x"}});
  const auto a = read_archive(dir);
  EXPECT_EQ(a.split.train, split.train);
  EXPECT_EQ(a.split.val, split.val);
  EXPECT_EQ(a.split.test, split.test);
  EXPECT_EQ(a.split.seed, 9u);
  EXPECT_EQ(a.norm, norm);
  EXPECT_EQ(a.manifest.at("note"), "x");
  std::filesystem::remove_all(dir);
}

TEST(Dataset, BuildsBalancedTraining) {
  const Timeline tl(regular(60000, 10));
  std::vector<SpoofingFlag> flags;
  for (std::int64_t t = 30000; t < 600000; t += 40000) flags.push_back(flag_at(t));
  const auto d = build_dataset(tl.frames, flags, {}, 4);
  EXPECT_EQ(d.overall.positives, flags.size());
  EXPECT_EQ(d.overall.total, d.overall.positives + count_negative_windows(tl.frames, flags, {}));
  const auto c = count_labels(d.split.train);
  EXPECT_EQ(2 * c.positives, c.total);
  EXPECT_THROW(build_dataset(tl.frames, {}, {}, 4), DataError);
}
