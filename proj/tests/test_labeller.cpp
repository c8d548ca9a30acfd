#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "spoofdet/labeller.hpp"
#include "support.hpp"

using namespace spoofdet;
using spoofdet::testing::NaiveBook;
using spoofdet::testing::upd;

namespace {

// Quiet two-sided book, then `n` episodes: a large bid one tick under the
// touch is placed and cancelled, after which the whole book steps up.
struct SpoofStream {
  UpdateStream stream;
  std::vector<std::int64_t> cancel_ts;
};

SpoofStream make_spoof_stream(int n, bool move_after = true) {
  SpoofStream out;
  std::int64_t seq = 0;
  std::int64_t ts = 1000;
  auto push = [&](Side s, std::int64_t price_ticks, std::int64_t size) {
    out.stream.updates.push_back(
        {++seq, ts, s, Price::from_raw(price_ticks * 1000000), Volume::from_units(size)});
    ts += 10;
  };
  std::int64_t bid = 10000;  // ticks of 0.01
  for (int l = 0; l < 30; ++l) push(Side::Bid, bid - l, 10);
  for (int l = 0; l < 30; ++l) push(Side::Ask, bid + 1 + l, 10);
  for (int e = 0; e < n; ++e) {
    for (int q = 0; q < 150; ++q) push(Side::Ask, bid + 10, 10 + q % 3);
    push(Side::Bid, bid - 1, 1000);
    for (int q = 0; q < 20; ++q) push(Side::Ask, bid + 10, 10 + q % 3);
    out.cancel_ts.push_back(ts);
    push(Side::Bid, bid - 1, 10);
    if (move_after) {
      push(Side::Bid, bid + 1, 10);
      push(Side::Ask, bid + 1, 0);
      push(Side::Ask, bid + 31, 10);
      push(Side::Bid, bid - 29, 0);
      ++bid;
    }
  }
  for (int q = 0; q < 150; ++q) push(Side::Ask, bid + 10, 10 + q % 3);
  return out;
}

const FeatureConfig kSmallVol{.depth = 25, .vol_window = 10, .vol_lag = 3};

}  // namespace

TEST(Conditions, VolumeAgainstPreCancelDepth) {
  FeatureFrame f;
  f.best_bid = Price::parse("100");
  f.best_ask = Price::parse("101");
  f.cancelled_volume = Volume::parse("50");
  f.distance = 0.0;
  const Thresholds th{.t1 = 0.3};
  EXPECT_TRUE(evaluate_conditions(f, Volume::parse("100"), 1.0, th).volume);
  EXPECT_FALSE(evaluate_conditions(f, Volume::parse("200"), 1.0, th).volume);
  // strict inequality at equality
  EXPECT_FALSE(evaluate_conditions(f, Volume::parse("50"), 1.0, Thresholds{.t1 = 1.0}).volume);
}

TEST(Conditions, DistanceAndVolatility) {
  FeatureFrame f;
  f.best_bid = Price::parse("100");
  f.best_ask = Price::parse("101");
  f.cancelled_volume = Volume::parse("1");
  f.distance = 0.02;
  EXPECT_FALSE(evaluate_conditions(f, Volume::parse("1"), 1.0, {}).distance);
  f.distance = 0.01;
  EXPECT_TRUE(evaluate_conditions(f, Volume::parse("1"), 1.0, {}).distance);
  EXPECT_FALSE(evaluate_conditions(f, Volume::parse("1"), 0.5, {}).volatility);
  EXPECT_TRUE(evaluate_conditions(f, Volume::parse("1"), 0.51, {}).volatility);
}

TEST(Conditions, RejectsNonCancellation) {
  FeatureFrame f;
  f.distance = 0.0;
  EXPECT_THROW(evaluate_conditions(f, Volume::parse("1"), 1.0, {}), std::invalid_argument);
}

TEST(Labeller, FutureVariationUsesOnlyLaterFramesInHorizon) {
  std::vector<FeatureFrame> frames(5);
  const std::int64_t ts[] = {0, 1000, 1000, 3000, 3001};
  const double dv[] = {0, 9, 0.7, 0.3, 100};
  for (int i = 0; i < 5; ++i) {
    frames[i].ts = ts[i];
    frames[i].vol_variation = dv[i];
  }
  EXPECT_DOUBLE_EQ(future_vol_variation(frames, 1, 2000), 0.3);
  EXPECT_DOUBLE_EQ(future_vol_variation(frames, 0, 2000), 9.0);
  EXPECT_EQ(future_vol_variation(frames, 4, 2000), -std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(future_vol_variation(frames, 1, 0), 9.0);
}

TEST(Labeller, FlagsEveryInjectedEpisode) {
  const auto s = make_spoof_stream(4);
  const auto frames = replay(s.stream, kSmallVol).frames;
  const auto flags = flag_spoofing(frames, {});
  ASSERT_EQ(flags.size(), 4u);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(flags[i].t0, s.cancel_ts[i]);
    EXPECT_EQ(flags[i].side, Side::Bid);
    EXPECT_EQ(flags[i].cancelled_volume, Volume::from_units(990));
    EXPECT_TRUE(flags[i].conditions.all());
  }
}

TEST(Labeller, NoFlagsWithoutPriceMove) {
  const auto s = make_spoof_stream(4, false);
  EXPECT_TRUE(flag_spoofing(replay(s.stream, kSmallVol).frames, {}).empty());
}

TEST(Labeller, UnreachableVolumeThresholdFlagsNothing) {
  const auto s = make_spoof_stream(4);
  const auto frames = replay(s.stream, kSmallVol).frames;
  EXPECT_TRUE(flag_spoofing(frames, {.t1 = 1.0}).empty());
}

TEST(Labeller, EmptyInputGivesNoFlags) {
  EXPECT_TRUE(flag_spoofing(std::vector<FeatureFrame>{}, {}).empty());
}

// Brute force: rebuild the book per update and evaluate the three
// conditions literally.
TEST(LabellerProperty, MatchesBruteForce) {
  Rng rng(19);
  for (int rep = 0; rep < 8; ++rep) {
    UpdateStream s;
    s.updates = spoofdet::testing::random_stream(rng, {.updates = 4000, .spread_ticks = 20});
    const auto frames = replay(s, kSmallVol).frames;
    for (const Thresholds th : {Thresholds{.t1 = 0.05, .t2 = 0.002, .t3 = 0.05},
                                Thresholds{.t1 = 0.02, .t2 = 0.01, .t3 = 0.0, .horizon_ms = 500}}) {
      std::vector<std::size_t> expected;
      NaiveBook book;
      for (std::size_t i = 0; i < s.updates.size(); ++i) {
        const auto& u = s.updates[i];
        const std::int64_t depth_before = book.cum(u.side, 25);
        const std::int64_t before = book.size_at(u.side, u.price.raw());
        book.apply(u);
        const std::int64_t cancelled = before - u.size.raw();
        const auto touch = book.best(u.side);
        if (cancelled <= 0 || !touch || !book.best(Side::Bid) || !book.best(Side::Ask)) continue;
        const bool c1 = static_cast<double>(cancelled) > th.t1 * static_cast<double>(depth_before);
        const double dist =
            std::abs(static_cast<double>(u.price.raw() - *touch)) / static_cast<double>(*touch);
        const bool c2 = dist <= th.t2;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = i + 1; j < frames.size(); ++j) {
          if (frames[j].ts > u.ts + th.horizon_ms) break;
          if (frames[j].ts > u.ts) mx = std::max(mx, frames[j].vol_variation);
        }
        if (c1 && c2 && mx > th.t3) expected.push_back(i);
      }
      const auto flags = flag_spoofing(frames, th);
      std::vector<std::size_t> got;
      for (const auto& f : flags) got.push_back(f.frame_index);
      ASSERT_EQ(got, expected);
      ASSERT_FALSE(expected.empty());
    }
  }
}

// Raising any threshold can only remove flags.
TEST(LabellerProperty, MonotoneInThresholds) {
  Rng rng(23);
  UpdateStream s;
  s.updates = spoofdet::testing::random_stream(rng, {.updates = 20000, .spread_ticks = 20});
  const auto frames = replay(s, kSmallVol).frames;
  auto indices = [&](const Thresholds& th) {
    std::vector<std::size_t> v;
    for (const auto& f : flag_spoofing(frames, th)) v.push_back(f.frame_index);
    return v;
  };
  const Thresholds base{.t1 = 0.02, .t2 = 0.01, .t3 = 0.0};
  const auto all = indices(base);
  ASSERT_FALSE(all.empty());
  for (const Thresholds th : {Thresholds{.t1 = 0.05, .t2 = 0.01, .t3 = 0.0},
                              Thresholds{.t1 = 0.02, .t2 = 0.001, .t3 = 0.0},
                              Thresholds{.t1 = 0.02, .t2 = 0.01, .t3 = 0.3}}) {
    const auto sub = indices(th);
    EXPECT_LE(sub.size(), all.size());
    EXPECT_TRUE(std::includes(all.begin(), all.end(), sub.begin(), sub.end()));
  }
}

TEST(Labeller, FlagsRoundTripThroughNdjson) {
  const auto s = make_spoof_stream(3);
  const auto flags = flag_spoofing(replay(s.stream, kSmallVol).frames, {});
  std::stringstream io;
  write_flags(io, flags);
  const auto text = io.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            R"({"t0":)" + std::to_string(flags[0].t0) +
                R"(,"side":"bid","price":"99.99","cancelled_volume":"990","c":[true,true,true]})");
  auto back = read_flags(io);
  ASSERT_EQ(back.size(), flags.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    back[i].frame_index = flags[i].frame_index;
    EXPECT_EQ(back[i], flags[i]);
  }
}
