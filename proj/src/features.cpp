#include "spoofdet/features.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace spoofdet {

VolatilityState::VolatilityState(std::size_t window, std::size_t lag) : window_(window), lag_(lag) {
  if (window_ == 0) throw std::invalid_argument("volatility window must be positive");
  if (lag_ == 0) throw std::invalid_argument("volatility lag must be positive");
  mids_.reserve(window_);
  sigma_hist_.reserve(lag_ + 1);
}

double VolatilityState::update(double mid) {
  return update_twice_mid_raw(std::llround(mid * 2.0 * static_cast<double>(Price::kScale)));
}

double VolatilityState::update_twice_mid_raw(std::int64_t x) {
  if (mids_.size() < window_) {
    mids_.push_back(x);
  } else {
    const std::int64_t old = mids_[head_];
    sum_ -= old;
    sum_sq_ -= static_cast<Int128>(old) * old;
    mids_[head_] = x;
    head_ = (head_ + 1) % window_;
  }
  sum_ += x;
  sum_sq_ += static_cast<Int128>(x) * x;

  const auto n = static_cast<Int128>(mids_.size());
  double sigma = 0.0;
  if (n >= 2) {
    const Int128 num = n * sum_sq_ - static_cast<Int128>(sum_) * sum_;
    sigma = std::sqrt(static_cast<double>(num)) / static_cast<double>(n) /
            (2.0 * static_cast<double>(Price::kScale));
  }
  if (sigma_hist_.size() == lag_ + 1) sigma_hist_.erase(sigma_hist_.begin());
  sigma_hist_.push_back(sigma);
  return sigma;
}

double VolatilityState::variation() const noexcept {
  if (sigma_hist_.empty()) return 0.0;
  const double past = sigma_hist_.front();
  return (sigma_hist_.back() - past) / std::max(past, kEpsilon);
}

std::optional<double> distance_to_touch(const OrderBook& book, Side side, Price price) noexcept {
  const auto touch = book.touch(side);
  if (!touch) return std::nullopt;
  const std::int64_t diff = price.raw() - touch->raw();
  return static_cast<double>(diff < 0 ? -diff : diff) / static_cast<double>(touch->raw());
}

FeatureFrame extract_frame(const OrderBook& book, const L2Update& u, const UpdateEffect& effect,
                           VolatilityState& vstate, std::size_t depth) {
  FeatureFrame f;
  f.ts = u.ts;
  f.side = u.side;
  f.best_bid = book.best_bid();
  f.best_ask = book.best_ask();
  f.delta_volume = effect.delta_volume;
  f.update_price = u.price;
  f.cum_bid_25 = book.cumulative_volume(Side::Bid, depth);
  f.cum_ask_25 = book.cumulative_volume(Side::Ask, depth);
  f.cancelled_volume = effect.cancelled_volume;
  f.distance = distance_to_touch(book, u.side, u.price);
  if (f.best_bid && f.best_ask) {
    f.volatility = vstate.update_twice_mid_raw(f.best_bid->raw() + f.best_ask->raw());
  } else {
    f.volatility = vstate.sigma();
  }
  f.vol_variation = vstate.variation();
  return f;
}

FeatureExtractor::FeatureExtractor(FeatureConfig cfg)
    : cfg_(cfg), vstate_(cfg.vol_window, cfg.vol_lag) {}

FeatureFrame FeatureExtractor::push(const L2Update& u) {
  const UpdateEffect eff = book_.apply(u);
  return extract_frame(book_, u, eff, vstate_, cfg_.depth);
}

ReplayResult replay(const UpdateStream& stream, const FeatureConfig& cfg) {
  FeatureExtractor fx(cfg);
  if (stream.snapshot) fx.load_snapshot(*stream.snapshot);
  ReplayResult out;
  out.frames.reserve(stream.updates.size());
  for (const L2Update& u : stream.updates) out.frames.push_back(fx.push(u));
  out.anomalies = fx.book().anomalies();
  return out;
}

std::vector<FeatureVector> project(std::span<const FeatureFrame> frames) {
  std::vector<FeatureVector> out;
  out.reserve(frames.size());
  double mid = 0.0;
  double spread = 0.0;
  bool have_mid = false;
  for (const FeatureFrame& f : frames) {
    if (f.best_bid && f.best_ask) {
      mid = static_cast<double>(f.best_bid->raw() + f.best_ask->raw()) * 0.5 /
            static_cast<double>(Price::kScale);
      spread = (*f.best_ask - *f.best_bid).to_double();
      have_mid = true;
    } else if (!have_mid) {
      mid = f.update_price.to_double();
    }
    out.push_back({mid, spread, f.delta_volume.to_double(), f.update_price.to_double(),
                   f.volatility, f.cum_bid_25.to_double(), f.cum_ask_25.to_double()});
  }
  return out;
}

void write_frames_csv(std::ostream& out, std::span<const FeatureFrame> frames) {
  out << kFrameCsvHeader << '\n';
  const auto old_prec = out.precision(17);
  for (const FeatureFrame& f : frames) {
    out << f.ts << ',' << to_string(f.side) << ',';
    if (f.best_bid) out << f.best_bid->to_string();
    out << ',';
    if (f.best_ask) out << f.best_ask->to_string();
    out << ',' << f.delta_volume.to_string() << ',' << f.update_price.to_string() << ','
        << f.volatility << ',' << f.vol_variation << ',' << f.cum_bid_25.to_string() << ','
        << f.cum_ask_25.to_string() << ',';
    if (f.distance) out << *f.distance;
    out << ',' << f.cancelled_volume.to_string() << '\n';
  }
  out.precision(old_prec);
}

}  // namespace spoofdet
