#include "spoofdet/labeller.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "spoofdet/errors.hpp"

namespace spoofdet {

void Thresholds::validate() const {
  if (!(t1 > 0.0)) throw UsageError("labeller.t1 must be > 0");
  if (!(t2 >= 0.0)) throw UsageError("labeller.t2 must be >= 0");
  if (horizon_ms < 0) throw UsageError("labeller.horizon_ms must be >= 0");
}

ConditionSet evaluate_conditions(const FeatureFrame& frame, Volume pre_cancel_depth,
                                 double future_dsigma, const Thresholds& th) {
  if (!frame.cancelled_volume.positive()) {
    throw std::invalid_argument("evaluate_conditions: frame is not a cancellation");
  }
  if (!frame.distance) throw std::invalid_argument("evaluate_conditions: distance not computable");
  ConditionSet c;
  c.volume = static_cast<double>(frame.cancelled_volume.raw()) >
             th.t1 * static_cast<double>(pre_cancel_depth.raw());
  c.distance = *frame.distance <= th.t2;
  c.volatility = future_dsigma > th.t3;
  return c;
}

double future_vol_variation(std::span<const FeatureFrame> frames, std::size_t index,
                            std::int64_t horizon_ms) {
  if (horizon_ms == 0) return frames[index].vol_variation;
  const std::int64_t t0 = frames[index].ts;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t j = index + 1; j < frames.size() && frames[j].ts <= t0 + horizon_ms; ++j) {
    if (frames[j].ts > t0) best = std::max(best, frames[j].vol_variation);
  }
  return best;
}

namespace {

Volume depth_on(const FeatureFrame& f, Side side) {
  return side == Side::Bid ? f.cum_bid_25 : f.cum_ask_25;
}

}  // namespace

std::vector<SpoofingFlag> flag_spoofing(std::span<const FeatureFrame> frames, const Thresholds& th) {
  th.validate();
  std::vector<SpoofingFlag> flags;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const FeatureFrame& f = frames[i];
    if (!f.cancelled_volume.positive() || !f.labelable()) continue;
    // The previous frame holds the book as it stood before this update. For
    // the first frame the level being cancelled is added back instead.
    const Volume pre = i > 0 ? depth_on(frames[i - 1], f.side) : depth_on(f, f.side) + f.cancelled_volume;
    ConditionSet c = evaluate_conditions(f, pre, 0.0, th);
    if (!c.volume || !c.distance) continue;
    c.volatility = future_vol_variation(frames, i, th.horizon_ms) > th.t3;
    if (!c.all()) continue;
    flags.push_back({f.ts, i, f.side, f.update_price, f.cancelled_volume, c});
  }
  return flags;
}

std::string format_flag_json(const SpoofingFlag& f) {
  auto b = [](bool v) { return v ? "true" : "false"; };
  std::string s = "{\"t0\":" + std::to_string(f.t0) + ",\"side\":\"" + std::string(to_string(f.side)) +
                  "\",\"price\":\"" + f.price.to_string() + "\",\"cancelled_volume\":\"" +
                  f.cancelled_volume.to_string() + "\",\"c\":[";
  s += b(f.conditions.volume);
  s += ',';
  s += b(f.conditions.distance);
  s += ',';
  s += b(f.conditions.volatility);
  s += "]}";
  return s;
}

void write_flags(std::ostream& out, std::span<const SpoofingFlag> flags) {
  for (const SpoofingFlag& f : flags) out << format_flag_json(f) << '\n';
}

void write_flags(const std::filesystem::path& path, std::span<const SpoofingFlag> flags) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_flags(out, flags);
}

std::vector<SpoofingFlag> read_flags(std::istream& in) {
  std::vector<SpoofingFlag> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      SpoofingFlag f;
      f.t0 = j.at("t0").get<std::int64_t>();
      const auto side = j.at("side").get<std::string>();
      if (side != "bid" && side != "ask") throw DataError("bad side");
      f.side = side == "bid" ? Side::Bid : Side::Ask;
      f.price = Price::parse(j.at("price").get<std::string>());
      f.cancelled_volume = Volume::parse(j.at("cancelled_volume").get<std::string>());
      const auto& c = j.at("c");
      if (!c.is_array() || c.size() != 3) throw DataError("c must have 3 booleans");
      f.conditions = {c[0].get<bool>(), c[1].get<bool>(), c[2].get<bool>()};
      out.push_back(f);
    } catch (const std::exception& e) {
      throw DataError("flags line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<SpoofingFlag> read_flags(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return read_flags(in);
}

}  // namespace spoofdet
