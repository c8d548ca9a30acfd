#include "spoofdet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>

#include "spoofdet/errors.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet {

using nlohmann::json;

namespace {

constexpr std::int64_t kSizeQuantum = 10000;  // sizes rounded to 1e-4 units

std::int64_t tick_raw(double tick) {
  const double raw = tick * static_cast<double>(Price::kScale);
  const auto r = std::llround(raw);
  if (r <= 0 || std::abs(raw - static_cast<double>(r)) > 1e-6) {
    throw UsageError("generator tick must be a positive multiple of 1e-8");
  }
  return r;
}

double normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double exponential(Rng& rng, double mean) { return -mean * std::log(1.0 - uniform01(rng)); }

struct LiveSpoof {
  std::int64_t tick = 0;
  std::int64_t volume = 0;  // raw
};

enum class Mode { Normal, Drift, Freeze };

class Builder {
 public:
  explicit Builder(const ScenarioConfig& cfg) : cfg_(cfg), tick_(tick_raw(cfg.tick)) {}

  GeneratedStream run() {
    reseed(0);
    init_book();
    for (std::size_t k = 0; k < cfg_.spoofs.size(); ++k) episode(k);
    advance_to(static_cast<double>(cfg_.duration_ms));
    return std::move(out_);
  }

 private:
  using Book = std::map<std::int64_t, std::int64_t>;  // tick -> background raw size

  Book& book(Side s) { return s == Side::Bid ? bids_ : asks_; }
  std::optional<LiveSpoof>& live(Side s) { return live_[s == Side::Bid ? 0 : 1]; }
  std::int64_t best_bid() const { return bids_.rbegin()->first; }
  std::int64_t best_ask() const { return asks_.begin()->first; }
  std::int64_t touch(Side s) const { return s == Side::Bid ? best_bid() : best_ask(); }
  std::int64_t far(Side s) const { return s == Side::Bid ? bids_.begin()->first : asks_.rbegin()->first; }

  void reseed(std::uint32_t segment) {
    segment_ = segment;
    const std::uint32_t salt = segment < cfg_.segment_salts.size() ? cfg_.segment_salts[segment] : 0;
    rng_.seed(mix_seed(mix_seed(cfg_.seed, segment), salt));
  }

  std::int64_t draw_size() {
    double v = cfg_.size_median * std::exp(cfg_.size_sigma * normal(rng_));
    v = std::clamp(v, cfg_.size_median / 20.0, cfg_.size_cap * cfg_.size_median);
    const auto q = std::llround(v * static_cast<double>(Volume::kScale) / kSizeQuantum);
    return std::max<std::int64_t>(1, q) * kSizeQuantum;
  }

  void emit(Side s, std::int64_t tick, Provenance p) {
    const Book& b = book(s);
    const auto it = b.find(tick);
    std::int64_t size = it == b.end() ? 0 : it->second;
    const auto& sp = live(s);
    if (sp && sp->tick == tick) size += sp->volume;
    L2Update u;
    u.seq = static_cast<std::int64_t>(out_.stream.updates.size()) + 1;
    u.ts = cfg_.start_ts + static_cast<std::int64_t>(std::floor(now_));
    u.side = s;
    u.price = Price::from_raw(tick * tick_);
    u.size = Volume::from_raw(size);
    out_.stream.updates.push_back(u);
    out_.truth.provenance.push_back(p);
    out_.truth.segment.push_back(segment_);
  }

  void set_level(Side s, std::int64_t tick, std::int64_t size, Provenance p = Provenance::Background) {
    if (size == 0) {
      book(s).erase(tick);
    } else {
      book(s)[tick] = size;
    }
    emit(s, tick, p);
  }

  bool is_spoof_level(Side s, std::int64_t tick) {
    const auto& sp = live(s);
    return sp && sp->tick == tick;
  }

  void init_book() {
    const std::int64_t base = std::llround(cfg_.base_price / cfg_.tick);
    const std::int64_t bb = base - 1;
    const std::int64_t ba = base + 1;
    for (std::size_t i = 0; i < cfg_.depth_levels; ++i) {
      set_level(Side::Bid, bb - static_cast<std::int64_t>(i), draw_size());
      set_level(Side::Ask, ba + static_cast<std::int64_t>(i), draw_size());
    }
  }

  // Moves both touches one tick: removes the best level on the side being
  // pushed and adds a level inside on the other. Spread is preserved.
  bool shift(int dir, Provenance p) {
    const Side removed = dir > 0 ? Side::Ask : Side::Bid;
    if (book(removed).size() <= 2) return false;
    const std::int64_t t = touch(removed);
    if (is_spoof_level(removed, t)) return false;
    set_level(removed, t, 0, p);
    if (dir > 0) {
      set_level(Side::Bid, best_bid() + 1, draw_size(), p);
    } else {
      set_level(Side::Ask, best_ask() - 1, draw_size(), p);
    }
    return true;
  }

  void change_spread() {
    const std::int64_t spread = best_ask() - best_bid();
    const Side s = uniform01(rng_) < 0.5 ? Side::Bid : Side::Ask;
    const bool widen = spread <= 1 || (spread < cfg_.max_spread_ticks && uniform01(rng_) < 0.5);
    if (widen) {
      if (book(s).size() <= 2) return;
      const std::int64_t t = touch(s);
      if (is_spoof_level(s, t)) return;
      set_level(s, t, 0);
    } else {
      const std::int64_t t = s == Side::Bid ? best_bid() + 1 : best_ask() - 1;
      set_level(s, t, draw_size());
    }
  }

  void resize_level() {
    const Side s = uniform01(rng_) < 0.5 ? Side::Bid : Side::Ask;
    const auto n = static_cast<std::int64_t>(book(s).size());
    const auto depth = std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(exponential(rng_, 6.0)));
    const std::int64_t t = s == Side::Bid ? best_bid() - depth : best_ask() + depth;
    set_level(s, t, draw_size());
  }

  bool maintain() {
    for (Side s : {Side::Bid, Side::Ask}) {
      const std::size_t n = book(s).size();
      const std::int64_t f = far(s);
      if (n < cfg_.depth_levels) {
        set_level(s, s == Side::Bid ? f - 1 : f + 1, draw_size());
        return true;
      }
      if (n > cfg_.depth_levels + 4 && !is_spoof_level(s, f)) {
        set_level(s, f, 0);
        return true;
      }
    }
    return false;
  }

  double mid_ticks() const { return 0.5 * static_cast<double>(best_bid() + best_ask()); }

  void step() {
    if (mode_ == Mode::Drift && drift_left_ > 0) {
      const double steps_left = std::max(1.0, (drift_end_ - now_) / cfg_.mean_interval_ms);
      const double q = static_cast<double>(drift_left_) / steps_left;
      if (uniform01(rng_) < q) {
        if (shift(drift_dir_, Provenance::Drift)) --drift_left_;
        return;
      }
    }
    if (maintain()) return;
    const double u = uniform01(rng_);
    const bool frozen = mode_ == Mode::Freeze;
    if (u < cfg_.move_prob) {
      if (frozen) return;
      const double disp = mid_ticks() - cfg_.base_price / cfg_.tick;
      const double p_up = std::clamp(0.5 - cfg_.reversion * disp, 0.05, 0.95);
      shift(uniform01(rng_) < p_up ? 1 : -1, Provenance::Background);
    } else if (u < cfg_.move_prob + cfg_.spread_prob) {
      if (!frozen) change_spread();
    } else {
      resize_level();
    }
  }

  // Runs background steps until `t` (relative ms); the clock ends at t.
  void advance_to(double t) {
    while (true) {
      const double gap = exponential(rng_, cfg_.mean_interval_ms);
      if (now_ + gap >= t) break;
      now_ += gap;
      step();
    }
    now_ = std::max(now_, t);
  }

  std::int64_t top_depth(Side s) const {
    const Book& b = s == Side::Bid ? bids_ : asks_;
    std::int64_t sum = 0;
    std::size_t n = 0;
    if (s == Side::Bid) {
      for (auto it = b.rbegin(); it != b.rend() && n < kDefaultDepth; ++it, ++n) sum += it->second;
    } else {
      for (auto it = b.begin(); it != b.end() && n < kDefaultDepth; ++it, ++n) sum += it->second;
    }
    return sum;
  }

  void episode(std::size_t k) {
    const SpoofSpec& sp = cfg_.spoofs[k];
    advance_to(static_cast<double>(sp.start_ms));
    reseed(static_cast<std::uint32_t>(2 * k + 1));

    const Side s = sp.side;
    const double touch_price = static_cast<double>(touch(s)) * cfg_.tick;
    auto d = std::llround(sp.distance * touch_price / cfg_.tick);
    d = std::clamp<std::int64_t>(d, 0, static_cast<std::int64_t>(book(s).size()) - 1);
    const std::int64_t tick = s == Side::Bid ? touch(s) - d : touch(s) + d;
    std::int64_t volume = 0;
    if (sp.volume > 0) {
      volume = std::llround(sp.volume * static_cast<double>(Volume::kScale) / kSizeQuantum) * kSizeQuantum;
    } else {
      const double v = sp.volume_multiplier * static_cast<double>(top_depth(s));
      volume = std::llround(v / kSizeQuantum) * kSizeQuantum;
    }
    volume = std::max<std::int64_t>(volume, kSizeQuantum);
    if (!book(s).contains(tick)) set_level(s, tick, draw_size());

    InjectedSpoof inj;
    inj.spec_index = k;
    inj.side = s;
    inj.price = Price::from_raw(tick * tick_);
    inj.volume = Volume::from_raw(volume);
    inj.successful = sp.successful();
    live(s) = LiveSpoof{tick, volume};
    inj.place_index = out_.stream.updates.size();
    emit(s, tick, Provenance::SpoofPlace);

    advance_to(static_cast<double>(sp.cancel_ms()));
    live(s).reset();
    inj.cancel_index = out_.stream.updates.size();
    emit(s, tick, Provenance::SpoofCancel);
    inj.t0 = out_.stream.updates.back().ts;
    out_.truth.spoofs.push_back(inj);

    const double cancel = now_;
    double end = cancel;
    if (sp.successful()) {
      mode_ = Mode::Drift;
      drift_dir_ = s == Side::Bid ? 1 : -1;
      drift_left_ = std::max<std::int64_t>(1, std::llround(sp.drift * mid_ticks()));
      drift_end_ = cancel + static_cast<double>(sp.drift_ms);
      end = drift_end_;
    } else {
      mode_ = Mode::Freeze;
      end = cancel + static_cast<double>(cfg_.freeze_ms);
    }
    advance_to(end);
    mode_ = Mode::Normal;
    drift_left_ = 0;
    advance_to(end + static_cast<double>(cfg_.settle_ms));
    reseed(static_cast<std::uint32_t>(2 * k + 2));
  }

  const ScenarioConfig& cfg_;
  std::int64_t tick_;
  Book bids_;
  Book asks_;
  std::optional<LiveSpoof> live_[2];
  Rng rng_;
  double now_ = 0.0;
  std::uint32_t segment_ = 0;
  Mode mode_ = Mode::Normal;
  int drift_dir_ = 1;
  std::int64_t drift_left_ = 0;
  double drift_end_ = 0.0;
  GeneratedStream out_;
};

std::int64_t episode_end(const ScenarioConfig& cfg, const SpoofSpec& sp) {
  const std::int64_t after = sp.successful() ? sp.drift_ms : cfg.freeze_ms;
  return sp.cancel_ms() + after + cfg.settle_ms;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (duration_ms <= 0) throw UsageError("scenario.duration_ms must be positive");
  if (!(mean_interval_ms > 0.0)) throw UsageError("scenario.mean_interval_ms must be positive");
  if (!(base_price > 0.0) || !(tick > 0.0) || base_price < 100.0 * tick) {
    throw UsageError("scenario: base_price must be positive and at least 100 ticks");
  }
  tick_raw(tick);
  if (move_prob < 0 || spread_prob < 0 || move_prob + spread_prob > 1.0) {
    throw UsageError("scenario: move_prob + spread_prob must lie in [0, 1]");
  }
  if (max_spread_ticks < 1) throw UsageError("scenario.max_spread_ticks must be >= 1");
  if (!(size_median > 0.0) || size_sigma < 0 || size_cap < 1.0) {
    throw UsageError("scenario: bad size distribution");
  }
  if (depth_levels < 4) throw UsageError("scenario.depth_levels must be >= 4");
  if (freeze_ms < 0 || settle_ms < 0) throw UsageError("scenario: negative freeze/settle time");
  std::int64_t prev_end = -1;
  for (std::size_t k = 0; k < spoofs.size(); ++k) {
    const SpoofSpec& sp = spoofs[k];
    const std::string at = "spoof " + std::to_string(k) + ": ";
    if (sp.start_ms <= 0 || sp.hold_ms <= 0 || sp.drift_ms < 0 || sp.drift < 0 || sp.distance < 0) {
      throw UsageError(at + "bad timing or magnitude");
    }
    if (sp.volume <= 0 && !(sp.volume_multiplier > 0)) throw UsageError(at + "needs a positive size");
    if (sp.start_ms <= prev_end) {
      throw UsageError(at + "overlaps the previous episode (episodes must be disjoint and sorted)");
    }
    prev_end = episode_end(*this, sp);
    if (prev_end > duration_ms) throw UsageError(at + "runs past the end of the stream");
  }
}

void ScenarioConfig::validate(const Thresholds& th) const {
  validate();
  th.validate();
  for (std::size_t k = 0; k < spoofs.size(); ++k) {
    const SpoofSpec& sp = spoofs[k];
    const std::string at = "spoof " + std::to_string(k) + ": ";
    if (sp.volume <= 0 && !(sp.volume_multiplier > th.t1)) {
      throw UsageError(at + "volume multiplier must exceed t1");
    }
    if (!(sp.distance < th.t2)) throw UsageError(at + "distance must be below t2");
  }
}

std::vector<std::int64_t> GroundTruth::expected_t0() const {
  std::vector<std::int64_t> out;
  for (const auto& s : spoofs) {
    if (s.successful) out.push_back(s.t0);
  }
  return out;
}

GeneratedStream generate_stream(const ScenarioConfig& cfg) {
  cfg.validate();
  return Builder(cfg).run();
}

VerifyReport verify_against_labeller(const GeneratedStream& g, const std::vector<SpoofingFlag>& flags) {
  std::map<std::size_t, std::size_t> by_cancel;
  for (std::size_t k = 0; k < g.truth.spoofs.size(); ++k) {
    by_cancel[g.truth.spoofs[k].cancel_index] = k;
  }
  VerifyReport r;
  std::set<std::size_t> hit;
  for (const auto& f : flags) {
    const auto it = by_cancel.find(f.frame_index);
    if (it == by_cancel.end()) {
      r.background_flags.push_back(f.frame_index);
    } else if (!g.truth.spoofs[it->second].successful) {
      r.flagged_unsuccessful.push_back(it->second);
    } else {
      hit.insert(it->second);
    }
  }
  for (std::size_t k = 0; k < g.truth.spoofs.size(); ++k) {
    if (g.truth.spoofs[k].successful && !hit.contains(k)) r.missed.push_back(k);
  }
  return r;
}

CalibratedStream generate_verified(ScenarioConfig cfg, const Thresholds& th, const FeatureConfig& fcfg,
                                   std::size_t max_rounds) {
  cfg.validate(th);
  cfg.segment_salts.resize(2 * cfg.spoofs.size() + 1, 0);
  for (std::size_t round = 0; round < max_rounds; ++round) {
    CalibratedStream out;
    out.generated = generate_stream(cfg);
    out.frames = replay(out.generated.stream, fcfg).frames;
    out.flags = flag_spoofing(out.frames, th);
    const VerifyReport rep = verify_against_labeller(out.generated, out.flags);
    if (rep.exact()) {
      out.config = std::move(cfg);
      out.rounds = round + 1;
      return out;
    }
    const auto& truth = out.generated.truth;
    for (std::size_t k : rep.missed) {
      SpoofSpec& sp = cfg.spoofs[truth.spoofs[k].spec_index];
      const std::size_t ci = truth.spoofs[k].cancel_index;
      const FeatureFrame& fr = out.frames[ci];
      const Volume pre = ci == 0 ? fr.cum_bid_25
                                 : (fr.side == Side::Bid ? out.frames[ci - 1].cum_bid_25
                                                         : out.frames[ci - 1].cum_ask_25);
      const ConditionSet c =
          fr.labelable() ? evaluate_conditions(fr, pre, future_vol_variation(out.frames, ci, th.horizon_ms), th)
                         : ConditionSet{};
      if (!c.volume) {
        if (sp.volume > 0) {
          sp.volume *= 1.25;
        } else {
          sp.volume_multiplier *= 1.25;
        }
      }
      if (!c.distance) sp.distance *= 0.5;
      if (c.volume && c.distance) sp.drift *= 1.25;
      ++cfg.segment_salts[2 * truth.spoofs[k].spec_index + 1];
    }
    for (std::size_t k : rep.flagged_unsuccessful) ++cfg.segment_salts[2 * truth.spoofs[k].spec_index + 1];
    for (std::size_t i : rep.background_flags) ++cfg.segment_salts[truth.segment[i]];
    // Longer drift can push an episode into its successor; keep the schedule valid.
    for (std::size_t k = 0; k + 1 < cfg.spoofs.size(); ++k) {
      const std::int64_t end = episode_end(cfg, cfg.spoofs[k]);
      if (cfg.spoofs[k + 1].start_ms <= end) {
        cfg.spoofs[k].drift_ms = std::max<std::int64_t>(
            200, cfg.spoofs[k].drift_ms - (end - cfg.spoofs[k + 1].start_ms + 1));
      }
    }
  }
  throw DataError("scenario '" + cfg.name + "': labeller disagrees with ground truth after " +
                  std::to_string(max_rounds) + " re-rolls");
}

namespace {

struct Style {
  const char* name;
  double interval_ms;
  std::size_t episodes;
  std::size_t burst;            // spoofs per successful episode
  bool mixed_sides;
  Side side;
  double mult_lo, mult_hi;
  double dist_lo, dist_hi;
  std::int64_t hold_lo, hold_hi;
  double drift_lo, drift_hi;
  std::int64_t drift_ms_lo, drift_ms_hi;
  double hard_fraction;         // share of episodes that are unsuccessful spoofs
  double size_median;
  double move_prob;
  double gap_ms;                // initial mean spacing between episodes
};

// Styles differ in spoof side, size, hold/event length and update rate.
constexpr std::array<Style, 4> kStyles{{
    {"sample1", 30.0, 82, 1, false, Side::Bid, 0.6, 1.0, 0.0005, 0.001, 3000, 5000, 0.0008, 0.0015,
     1000, 2000, 0.10, 10.0, 0.04, 500000.0},
    {"sample2", 50.0, 89, 1, true, Side::Bid, 0.5, 0.8, 0.0005, 0.002, 2500, 4000, 0.0008, 0.0012,
     1200, 1800, 0.35, 8.0, 0.05, 700000.0},
    {"sample3", 20.0, 89, 4, false, Side::Bid, 0.8, 1.4, 0.0003, 0.0008, 2200, 3200, 0.0006, 0.001,
     800, 1400, 0.05, 14.0, 0.03, 250000.0},
    {"sample4", 40.0, 89, 1, false, Side::Ask, 0.6, 1.2, 0.0005, 0.0015, 4000, 7000, 0.001, 0.0018,
     1500, 2500, 0.15, 10.0, 0.04, 650000.0},
}};

double draw(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
std::int64_t draw(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(std::floor(uniform01(rng) * static_cast<double>(hi - lo + 1)));
}

// Builds the spoof schedule with episode spacing multiplied by gap_scale.
ScenarioConfig style_config(const Style& st, std::uint64_t seed, double gap_scale, double scale) {
  ScenarioConfig cfg;
  cfg.name = st.name;
  cfg.seed = seed;
  cfg.mean_interval_ms = st.interval_ms;
  cfg.size_median = st.size_median;
  cfg.move_prob = st.move_prob;
  Rng rng(mix_seed(seed, 0x5C4E));
  const auto episodes = std::max<std::size_t>(4, static_cast<std::size_t>(std::llround(st.episodes * scale)));
  const auto hard = static_cast<std::size_t>(std::llround(st.hard_fraction * static_cast<double>(episodes)));
  // Hard negatives are interleaved at evenly spaced slots.
  std::vector<bool> is_hard(episodes + hard, false);
  for (std::size_t h = 0; h < hard; ++h) is_hard[(h * is_hard.size()) / hard + (is_hard.size() / hard) / 2] = true;

  std::int64_t t = 20000;
  for (std::size_t e = 0; e < is_hard.size(); ++e) {
    t += static_cast<std::int64_t>(std::llround(st.gap_ms * gap_scale * draw(rng, 0.5, 1.5)));
    const std::size_t count = is_hard[e] ? 1 : st.burst;
    const Side side = st.mixed_sides ? (uniform01(rng) < 0.5 ? Side::Bid : Side::Ask) : st.side;
    for (std::size_t b = 0; b < count; ++b) {
      SpoofSpec sp;
      sp.start_ms = t;
      sp.side = side;
      sp.volume_multiplier = draw(rng, st.mult_lo, st.mult_hi);
      sp.distance = draw(rng, st.dist_lo, st.dist_hi);
      sp.hold_ms = draw(rng, st.hold_lo, st.hold_hi);
      sp.drift = is_hard[e] ? 0.0 : draw(rng, st.drift_lo, st.drift_hi);
      sp.drift_ms = draw(rng, st.drift_ms_lo, st.drift_ms_hi);
      cfg.spoofs.push_back(sp);
      t = episode_end(cfg, sp) + (b + 1 < count ? draw(rng, std::int64_t{1500}, std::int64_t{3000}) : 0);
    }
  }
  cfg.duration_ms = t + static_cast<std::int64_t>(std::llround(st.gap_ms * gap_scale * 0.5)) + 20000;
  return cfg;
}

struct Measured {
  CalibratedStream data;
  std::size_t pos = 0;
  std::size_t neg = 0;
};

Measured measure(ScenarioConfig cfg, const Thresholds& th, const WindowConfig& wcfg, const FeatureConfig& fcfg) {
  Measured m;
  m.data = generate_verified(std::move(cfg), th, fcfg);
  const auto& frames = m.data.frames;
  const auto ts_less = [](const FeatureFrame& f, std::int64_t v) { return f.ts < v; };
  for (const auto& f : m.data.flags) {
    const auto lo = std::lower_bound(frames.begin(), frames.end(), f.t0 - wcfg.lookback_ms, ts_less);
    if (lo != frames.end() && lo->ts <= f.t0 - wcfg.gap_ms) ++m.pos;
  }
  m.neg = count_negative_windows(frames, m.data.flags, wcfg);
  return m;
}

}  // namespace

BenchmarkSample make_benchmark_sample(std::size_t index, std::uint64_t master_seed, const Thresholds& th,
                                      const WindowConfig& wcfg, const FeatureConfig& fcfg, double scale) {
  if (index >= kStyles.size()) throw UsageError("benchmark sample index must be 0..3");
  if (!(scale > 0.0)) throw UsageError("benchmark scale must be positive");
  const Style& st = kStyles[index];
  const double target = kBenchmarkFrequencies[index];
  const std::uint64_t seed = mix_seed(master_seed, index + 1);

  // Negative count grows roughly linearly with the spacing, so rescale the
  // spacing until the positive frequency lands on target.
  double gap_scale = 1.0;
  Measured m;
  for (int iter = 0; iter < 8; ++iter) {
    m = measure(style_config(st, seed, gap_scale, scale), th, wcfg, fcfg);
    const double total = static_cast<double>(m.pos + m.neg);
    const double freq = total > 0 ? static_cast<double>(m.pos) / total : 0.0;
    if (m.pos == 0) throw DataError("benchmark sample produced no positive windows");
    if (std::abs(freq - target) < 0.0005) break;
    const double want_neg = static_cast<double>(m.pos) * (1.0 - target) / target;
    const double ratio = want_neg / std::max(1.0, static_cast<double>(m.neg));
    gap_scale *= std::clamp(ratio, 0.25, 4.0);
  }
  BenchmarkSample s;
  s.name = st.name;
  s.target_frequency = target;
  s.positive_windows = m.pos;
  s.negative_windows = m.neg;
  s.data = std::move(m.data);
  return s;
}

std::vector<BenchmarkSample> make_benchmark_suite(std::uint64_t master_seed, const Thresholds& th,
                                                  const WindowConfig& wcfg, const FeatureConfig& fcfg,
                                                  double scale) {
  std::vector<BenchmarkSample> out(kStyles.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < kStyles.size(); ++i) {
    try {
      out[i] = make_benchmark_sample(i, master_seed, th, wcfg, fcfg, scale);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return out;
}

namespace {

Side side_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "bid") return Side::Bid;
  if (s == "ask") return Side::Ask;
  throw UsageError("side must be \"bid\" or \"ask\", got \"" + s + "\"");
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw UsageError(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
      throw UsageError("unknown key '" + k + "' in " + where);
    }
  }
}

template <class T>
void get_if(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

json scenario_to_json(const ScenarioConfig& c) {
  json spoofs = json::array();
  for (const auto& s : c.spoofs) {
    spoofs.push_back({{"start_ms", s.start_ms},
                      {"side", std::string(to_string(s.side))},
                      {"volume_multiplier", s.volume_multiplier},
                      {"volume", s.volume},
                      {"distance", s.distance},
                      {"hold_ms", s.hold_ms},
                      {"drift", s.drift},
                      {"drift_ms", s.drift_ms}});
  }
  return {{"name", c.name},
          {"start_ts", c.start_ts},
          {"duration_ms", c.duration_ms},
          {"mean_interval_ms", c.mean_interval_ms},
          {"base_price", c.base_price},
          {"tick", c.tick},
          {"move_prob", c.move_prob},
          {"reversion", c.reversion},
          {"max_spread_ticks", c.max_spread_ticks},
          {"spread_prob", c.spread_prob},
          {"size_median", c.size_median},
          {"size_sigma", c.size_sigma},
          {"size_cap", c.size_cap},
          {"depth_levels", c.depth_levels},
          {"freeze_ms", c.freeze_ms},
          {"settle_ms", c.settle_ms},
          {"spoofs", std::move(spoofs)},
          {"segment_salts", c.segment_salts},
          {"seed", c.seed}};
}

ScenarioConfig scenario_from_json(const json& j) {
  ScenarioConfig c;
  try {
    check_keys(j,
               {"name", "start_ts", "duration_ms", "mean_interval_ms", "base_price", "tick", "move_prob",
                "reversion", "max_spread_ticks", "spread_prob", "size_median", "size_sigma", "size_cap",
                "depth_levels", "freeze_ms", "settle_ms", "spoofs", "segment_salts", "seed"},
               "scenario");
    get_if(j, "name", c.name);
    get_if(j, "start_ts", c.start_ts);
    get_if(j, "duration_ms", c.duration_ms);
    get_if(j, "mean_interval_ms", c.mean_interval_ms);
    get_if(j, "base_price", c.base_price);
    get_if(j, "tick", c.tick);
    get_if(j, "move_prob", c.move_prob);
    get_if(j, "reversion", c.reversion);
    get_if(j, "max_spread_ticks", c.max_spread_ticks);
    get_if(j, "spread_prob", c.spread_prob);
    get_if(j, "size_median", c.size_median);
    get_if(j, "size_sigma", c.size_sigma);
    get_if(j, "size_cap", c.size_cap);
    get_if(j, "depth_levels", c.depth_levels);
    get_if(j, "freeze_ms", c.freeze_ms);
    get_if(j, "settle_ms", c.settle_ms);
    get_if(j, "segment_salts", c.segment_salts);
    get_if(j, "seed", c.seed);
    if (j.contains("spoofs")) {
      for (const auto& e : j.at("spoofs")) {
        check_keys(e, {"start_ms", "side", "volume_multiplier", "volume", "distance", "hold_ms", "drift", "drift_ms"},
                   "scenario.spoofs[]");
        SpoofSpec s;
        get_if(e, "start_ms", s.start_ms);
        if (e.contains("side")) s.side = side_from(e.at("side"));
        get_if(e, "volume_multiplier", s.volume_multiplier);
        get_if(e, "volume", s.volume);
        get_if(e, "distance", s.distance);
        get_if(e, "hold_ms", s.hold_ms);
        get_if(e, "drift", s.drift);
        get_if(e, "drift_ms", s.drift_ms);
        c.spoofs.push_back(s);
      }
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad scenario: ") + e.what());
  }
  return c;
}

json truth_to_json(const GroundTruth& t) {
  json spoofs = json::array();
  for (const auto& s : t.spoofs) {
    spoofs.push_back({{"t0", s.t0},
                      {"side", std::string(to_string(s.side))},
                      {"price", s.price.to_string()},
                      {"volume", s.volume.to_string()},
                      {"successful", s.successful},
                      {"place_seq", s.place_index + 1},
                      {"cancel_seq", s.cancel_index + 1}});
  }
  // Provenance as run-length encoded [tag, count] pairs.
  static constexpr const char* kNames[] = {"background", "spoof_place", "spoof_cancel", "drift"};
  json runs = json::array();
  for (std::size_t i = 0; i < t.provenance.size();) {
    std::size_t j = i;
    while (j < t.provenance.size() && t.provenance[j] == t.provenance[i]) ++j;
    runs.push_back({kNames[static_cast<int>(t.provenance[i])], j - i});
    i = j;
  }
  return {{"spoofs", std::move(spoofs)}, {"provenance", std::move(runs)}};
}

}  // namespace spoofdet
