#include <gtest/gtest.h>

#include <deque>
#include <sstream>

#include "spoofdet/features.hpp"
#include "support.hpp"

using namespace spoofdet;
using spoofdet::testing::NaiveBook;
using spoofdet::testing::upd;

TEST(Volatility, FirstObservationIsZero) {
  VolatilityState v(4, 2);
  EXPECT_EQ(v.update(100.0), 0.0);
  EXPECT_EQ(v.variation(), 0.0);
}

TEST(Volatility, ConstantMidsHaveZeroSigma) {
  VolatilityState v(4, 2);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(v.update(100.0), 0.0);
}

TEST(Volatility, MatchesDirectStdDev) {
  VolatilityState v(4, 2);
  for (double m : {100.0, 102.0, 104.0, 106.0}) v.update(m);
  EXPECT_NEAR(v.sigma(), spoofdet::testing::direct_std({100, 102, 104, 106}), 1e-12);
  EXPECT_NEAR(v.sigma(), std::sqrt(5.0), 1e-12);
}

TEST(Volatility, VariationDoublingIsOne) {
  // sigma history 1 -> ... -> 2 over lag 1: mids chosen so sigma doubles.
  VolatilityState v(2, 1);
  v.update(100.0);
  v.update(102.0);  // sigma 1
  v.update(98.0);   // window {102, 98} sigma 2
  EXPECT_NEAR(v.variation(), 1.0, 1e-12);
}

TEST(Volatility, ConstantSigmaHistoryGivesZeroVariation) {
  VolatilityState v(2, 3);
  for (int i = 0; i < 10; ++i) v.update(i % 2 ? 101.0 : 99.0);
  EXPECT_NEAR(v.variation(), 0.0, 1e-12);
}

// Streaming sigma and variation against direct recomputation over a ring.
TEST(VolatilityProperty, StreamingMatchesBatch) {
  Rng rng(31);
  for (std::size_t W : {2u, 7u, 100u}) {
    VolatilityState v(W, 20);
    std::deque<double> mids;
    std::deque<double> sigmas;
    double mid = 1000.0;
    for (int i = 0; i < 3000; ++i) {
      mid += std::round((uniform01(rng) - 0.5) * 40.0) / 100.0;
      const double s = v.update(mid);
      mids.push_back(mid);
      if (mids.size() > W) mids.pop_front();
      const double direct = spoofdet::testing::direct_std({mids.begin(), mids.end()});
      ASSERT_NEAR(s, direct, 1e-9 * std::max(1.0, direct));
      sigmas.push_back(s);
      if (sigmas.size() > 21) sigmas.pop_front();
      const double past = sigmas.front();
      ASSERT_NEAR(v.variation(), (s - past) / std::max(past, 1e-12), 1e-9 * std::max(1.0, std::abs(v.variation())));
    }
  }
}

TEST(Distance, RelativeToSameSideTouch) {
  OrderBook b;
  b.apply(upd(1, 0, Side::Bid, "100", "1"));
  b.apply(upd(2, 0, Side::Ask, "101", "1"));
  EXPECT_EQ(*distance_to_touch(b, Side::Bid, Price::parse("100")), 0.0);
  EXPECT_DOUBLE_EQ(*distance_to_touch(b, Side::Bid, Price::parse("99")), 0.01);
  EXPECT_DOUBLE_EQ(*distance_to_touch(b, Side::Ask, Price::parse("102.01")), 1.01 / 101.0);
  OrderBook empty;
  EXPECT_FALSE(distance_to_touch(empty, Side::Ask, Price::parse("1")));
}

TEST(Distance, ScaleInvariant) {
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const std::int64_t touch = 1000 + static_cast<std::int64_t>(rng() % 100000);
    const std::int64_t p = touch - static_cast<std::int64_t>(rng() % 500);
    OrderBook a;
    OrderBook b;
    a.apply({1, 0, Side::Bid, Price::from_raw(touch * 1000), Volume::from_units(1)});
    b.apply({1, 0, Side::Bid, Price::from_raw(touch * 7000), Volume::from_units(1)});
    const double da = *distance_to_touch(a, Side::Bid, Price::from_raw(p * 1000));
    const double db = *distance_to_touch(b, Side::Bid, Price::from_raw(p * 7000));
    EXPECT_NEAR(da, db, 1e-15);
  }
}

TEST(Frames, SingleBidOnEmptyBook) {
  FeatureExtractor fx;
  const auto f = fx.push(upd(1, 10, Side::Bid, "100", "2"));
  EXPECT_TRUE(f.cum_ask_25.is_zero());
  EXPECT_EQ(f.cum_bid_25, Volume::parse("2"));
  EXPECT_EQ(*f.distance, 0.0);
  EXPECT_EQ(f.volatility, 0.0);
  EXPECT_FALSE(f.best_ask);
  EXPECT_FALSE(f.labelable());
}

TEST(Frames, LargeCancelNearTouchCarriesCancelledVolume) {
  FeatureExtractor fx;
  fx.push(upd(1, 0, Side::Bid, "100", "10"));
  fx.push(upd(2, 0, Side::Ask, "100.1", "10"));
  fx.push(upd(3, 1, Side::Bid, "99.5", "1510"));
  const auto f = fx.push(upd(4, 2, Side::Bid, "99.5", "10"));
  EXPECT_EQ(f.cancelled_volume, Volume::parse("1500"));
  EXPECT_EQ(f.delta_volume, Volume::parse("-1500"));
  EXPECT_NEAR(*f.distance, 0.005, 1e-15);
  EXPECT_TRUE(f.labelable());
}

// Every frame field recomputed from a from-scratch map book.
TEST(FramesProperty, ReplayMatchesRebuildOracle) {
  Rng rng(77);
  UpdateStream s;
  s.updates = spoofdet::testing::random_stream(rng, {.updates = 6000});
  const auto frames = replay(s).frames;
  ASSERT_EQ(frames.size(), s.updates.size());
  NaiveBook book;
  std::deque<double> mids;
  std::deque<double> sigmas;
  double sigma = 0.0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& u = s.updates[i];
    const std::int64_t before = book.size_at(u.side, u.price.raw());
    book.apply(u);
    const auto& f = frames[i];
    ASSERT_EQ(f.ts, u.ts);
    if (i) ASSERT_GE(f.ts, frames[i - 1].ts);
    ASSERT_EQ(f.delta_volume.raw(), u.size.raw() - before);
    ASSERT_EQ(f.cancelled_volume.raw(), std::max<std::int64_t>(0, before - u.size.raw()));
    ASSERT_EQ(f.cum_bid_25.raw(), book.cum(Side::Bid, 25));
    ASSERT_EQ(f.cum_ask_25.raw(), book.cum(Side::Ask, 25));
    const auto touch = book.best(u.side);
    ASSERT_EQ(f.distance.has_value(), touch.has_value());
    if (touch) {
      const double d = std::abs(static_cast<double>(u.price.raw() - *touch)) / static_cast<double>(*touch);
      ASSERT_NEAR(*f.distance, d, 1e-15);
    }
    const auto mid = book.mid();
    if (mid) {
      mids.push_back(*mid);
      if (mids.size() > 100) mids.pop_front();
      sigma = spoofdet::testing::direct_std({mids.begin(), mids.end()});
      sigmas.push_back(sigma);
      if (sigmas.size() > 21) sigmas.pop_front();
    }
    ASSERT_NEAR(f.volatility, sigma, 1e-9 * std::max(1.0, sigma));
    const double var = sigmas.empty() ? 0.0 : (sigmas.back() - sigmas.front()) / std::max(sigmas.front(), 1e-12);
    ASSERT_NEAR(f.vol_variation, var, 1e-6 * std::max(1.0, std::abs(var)));
  }
}

TEST(Frames, ProjectionHasSevenInputs) {
  FeatureExtractor fx;
  std::vector<FeatureFrame> frames;
  frames.push_back(fx.push(upd(1, 0, Side::Bid, "100", "2")));
  frames.push_back(fx.push(upd(2, 0, Side::Ask, "102", "3")));
  frames.push_back(fx.push(upd(3, 0, Side::Bid, "100", "0")));  // bid side empties
  const auto x = project(frames);
  ASSERT_EQ(x.size(), 3u);
  EXPECT_DOUBLE_EQ(x[1][0], 101.0);  // mid
  EXPECT_DOUBLE_EQ(x[1][1], 2.0);    // spread
  EXPECT_DOUBLE_EQ(x[1][2], 3.0);    // delta volume
  EXPECT_DOUBLE_EQ(x[1][3], 102.0);  // update price
  EXPECT_DOUBLE_EQ(x[1][5], 2.0);    // cum bid
  EXPECT_DOUBLE_EQ(x[1][6], 3.0);    // cum ask
  EXPECT_DOUBLE_EQ(x[2][0], 101.0);  // carried forward
  EXPECT_DOUBLE_EQ(x[2][5], 0.0);
}

TEST(Frames, CsvDumpHasFixedHeader) {
  FeatureExtractor fx;
  std::vector<FeatureFrame> frames{fx.push(upd(1, 0, Side::Bid, "100", "2"))};
  std::ostringstream out;
  write_frames_csv(out, frames);
  const auto text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "ts,side,best_bid,best_ask,delta_volume,update_price,volatility,vol_variation,cum_bid_25,"
            "cum_ask_25,distance,cancelled_volume");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}
