#pragma once

// Shared oracles and random stream builders for the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "spoofdet/features.hpp"
#include "spoofdet/grunet/kernels.hpp"
#include "spoofdet/orderbook.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet::testing {

// Independent book: one ordered map per side keyed by raw price, rebuilt
// by applying the absolute-size rule literally.
struct NaiveBook {
  std::map<std::int64_t, std::int64_t> bids;
  std::map<std::int64_t, std::int64_t> asks;

  void apply(const L2Update& u) {
    auto& m = u.side == Side::Bid ? bids : asks;
    if (u.size.raw() == 0) {
      m.erase(u.price.raw());
    } else {
      m[u.price.raw()] = u.size.raw();
    }
  }

  std::optional<std::int64_t> best(Side s) const {
    const auto& m = s == Side::Bid ? bids : asks;
    if (m.empty()) return std::nullopt;
    return s == Side::Bid ? m.rbegin()->first : m.begin()->first;
  }

  std::int64_t cum(Side s, std::size_t depth) const {
    std::int64_t sum = 0;
    std::size_t n = 0;
    if (s == Side::Bid) {
      for (auto it = bids.rbegin(); it != bids.rend() && n < depth; ++it, ++n) sum += it->second;
    } else {
      for (auto it = asks.begin(); it != asks.end() && n < depth; ++it, ++n) sum += it->second;
    }
    return sum;
  }

  std::int64_t size_at(Side s, std::int64_t p) const {
    const auto& m = s == Side::Bid ? bids : asks;
    const auto it = m.find(p);
    return it == m.end() ? 0 : it->second;
  }

  std::optional<double> mid() const {
    const auto b = best(Side::Bid);
    const auto a = best(Side::Ask);
    if (!b || !a) return std::nullopt;
    return static_cast<double>(*b + *a) / 2.0 / static_cast<double>(Price::kScale);
  }
};

struct RandomStreamSpec {
  std::size_t updates = 1000;
  std::int64_t center_ticks = 10000;  // in ticks of 0.01
  std::int64_t spread_ticks = 60;     // levels drawn within +-spread of the moving centre
  double remove_prob = 0.3;
  double absent_zero_prob = 0.01;     // zero-size update on a level that is not there
  double cross_prob = 0.01;           // bid placed above centre / ask below
  std::int64_t start_ts = 1600000000000;
};

// Random absolute-size stream around a wandering centre; exercises
// additions, increases, decreases, removals, absent-level zeros and
// transient crosses.
inline std::vector<L2Update> random_stream(Rng& rng, const RandomStreamSpec& spec = {}) {
  std::vector<L2Update> out;
  out.reserve(spec.updates);
  NaiveBook book;
  std::int64_t centre = spec.center_ticks;
  std::int64_t ts = spec.start_ts;
  constexpr std::int64_t tick = Price::kScale / 100;
  for (std::size_t i = 0; i < spec.updates; ++i) {
    if (uniform01(rng) < 0.02) centre += uniform01(rng) < 0.5 ? -1 : 1;
    if (uniform01(rng) < 0.7) ts += static_cast<std::int64_t>(uniform01(rng) * 60.0);
    L2Update u;
    u.seq = static_cast<std::int64_t>(i) + 1;
    u.ts = ts;
    u.side = uniform01(rng) < 0.5 ? Side::Bid : Side::Ask;
    const auto off = 1 + static_cast<std::int64_t>(uniform01(rng) * static_cast<double>(spec.spread_ticks));
    std::int64_t p = u.side == Side::Bid ? centre - off : centre + off;
    if (uniform01(rng) < spec.cross_prob) p = u.side == Side::Bid ? centre + 1 : centre - 1;
    const double r = uniform01(rng);
    const auto& m = u.side == Side::Bid ? book.bids : book.asks;
    if (r < spec.absent_zero_prob) {
      while (m.contains(p * tick)) ++p;
      u.size = Volume::from_raw(0);
    } else if (r < spec.remove_prob && !m.empty()) {
      // remove an existing level chosen uniformly
      auto it = m.begin();
      std::advance(it, static_cast<long>(rng() % m.size()));
      p = it->first / tick;
      u.size = Volume::from_raw(0);
    } else {
      u.size = Volume::from_raw((1 + static_cast<std::int64_t>(uniform01(rng) * 5000.0)) * 100000);
    }
    u.price = Price::from_raw(p * tick);
    book.apply(u);
    out.push_back(u);
  }
  return out;
}

// Population std-dev computed directly from the values.
inline double direct_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Windows whose class is visible in the mean of feature 0 (+1 vs -1) under
// unit noise on every feature.
inline std::vector<Window> toy_windows(std::size_t n, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Window> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Window& w = out[i];
    w.label = static_cast<int>(i % 2);
    w.ts.resize(steps);
    w.x.resize(steps * kFeatureCount);
    for (std::size_t t = 0; t < steps; ++t) {
      w.ts[t] = static_cast<std::int64_t>(t);
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double u1 = 1.0 - uniform01(rng);
        const double u2 = uniform01(rng);
        const double noise = std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
        w.x[t * kFeatureCount + f] = noise + (f == 0 ? (w.label ? 1.0 : -1.0) : 0.0);
      }
    }
  }
  return out;
}

// Largest relative error between the analytic BCE gradient of one sequence
// and central finite differences over every parameter. The denominator is
// floored so that parameters with near-zero gradient are judged on an
// absolute scale.
inline double gradient_check(grunet::GruModel& model, const std::vector<double>& x, std::size_t steps,
                             int label, const grunet::DropoutMasks* masks = nullptr,
                             double step = 1e-5, double floor = 1e-6) {
  using namespace grunet;
  auto loss = [&]() {
    SequenceCache c;
    return bce_loss(sigmoid(forward(model, x, steps, c, masks)), label, 1.0);
  };
  SequenceCache cache;
  const double p = sigmoid(forward(model, x, steps, cache, masks));
  std::vector<double> grad(model.param_count(), 0.0);
  backward(model, cache, masks, bce_dlogit(p, label, 1.0), grad);
  double worst = 0.0;
  auto params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + step;
    const double up = loss();
    params[i] = keep - step;
    const double down = loss();
    params[i] = keep;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(numeric), std::abs(grad[i]), floor});
    worst = std::max(worst, std::abs(numeric - grad[i]) / denom);
  }
  return worst;
}

inline L2Update upd(std::int64_t seq, std::int64_t ts, Side side, const char* price, const char* size) {
  return L2Update{seq, ts, side, Price::parse(price), Volume::parse(size)};
}

}  // namespace spoofdet::testing
