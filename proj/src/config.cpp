#include "spoofdet/config.hpp"

#include <cstdio>
#include <fstream>

#include "spoofdet/errors.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet {

using nlohmann::json;

void RunConfig::validate() const {
  if (features.depth == 0 || features.vol_window < 2 || features.vol_lag == 0) {
    throw UsageError("features: depth >= 1, vol_window >= 2 and vol_lag >= 1 required");
  }
  labeller.validate();
  windows.validate();
  if (split.train <= 0 || split.val <= 0 || split.test <= 0) throw UsageError("split ratios must be positive");
  if (!(generate.scale > 0.0)) throw UsageError("generate.scale must be positive");
  if (generate.max_rounds == 0) throw UsageError("generate.max_rounds must be >= 1");
  train.validate();
  const auto& sp = search.space;
  if (sp.layers.empty() || sp.hidden.empty() || sp.dropout_min > sp.dropout_max || !(sp.lr_min > 0) ||
      sp.lr_min > sp.lr_max || sp.epochs_min > sp.epochs_max) {
    throw UsageError("search: inconsistent space");
  }
  eval_config().validate();
  if (smoke.seeds == 0) throw UsageError("smoke.seeds must be >= 1");
}

EvalConfig RunConfig::eval_config() const {
  EvalConfig e;
  e.seeds = eval_seeds;
  e.tau = tau;
  e.seed = seed;
  e.train = train;
  return e;
}

void RunConfig::apply_smoke() {
  eval_seeds = smoke.seeds;
  train.epochs = smoke.epochs;
  search.budget = std::min<std::size_t>(search.budget, 1);
}

json config_to_json(const RunConfig& c) {
  json train = grunet::train_config_to_json(c.train);
  train.erase("seed");
  train["parallel"] = c.train.parallel;
  const auto& sp = c.search.space;
  return {
      {"seed", c.seed},
      {"features", {{"depth", c.features.depth}, {"vol_window", c.features.vol_window}, {"vol_lag", c.features.vol_lag}}},
      {"labeller", {{"t1", c.labeller.t1}, {"t2", c.labeller.t2}, {"t3", c.labeller.t3}, {"horizon_ms", c.labeller.horizon_ms}}},
      {"windows",
       {{"length", c.windows.length},
        {"lookback_ms", c.windows.lookback_ms},
        {"gap_ms", c.windows.gap_ms},
        {"stride", c.windows.stride},
        {"split", {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}}}}},
      {"generate", {{"scale", c.generate.scale}, {"max_rounds", c.generate.max_rounds}}},
      {"train", std::move(train)},
      {"search",
       {{"budget", c.search.budget},
        {"layers", sp.layers},
        {"hidden", sp.hidden},
        {"dropout_min", sp.dropout_min},
        {"dropout_max", sp.dropout_max},
        {"lr_min", sp.lr_min},
        {"lr_max", sp.lr_max},
        {"epochs_min", sp.epochs_min},
        {"epochs_max", sp.epochs_max}}},
      {"eval", {{"seeds", c.eval_seeds}, {"tau", c.tau}}},
      {"smoke", {{"seeds", c.smoke.seeds}, {"epochs", c.smoke.epochs}}},
  };
}

namespace {

// Copies every key of `src` into `dst`, which holds the defaults; a key
// absent from `dst` is unknown.
void overlay(json& dst, const json& src, const std::string& where) {
  if (!src.is_object()) throw UsageError(where.empty() ? "config must be a JSON object" : where + " must be an object");
  for (const auto& [k, v] : src.items()) {
    const std::string path = where.empty() ? k : where + "." + k;
    if (!dst.contains(k)) throw UsageError("unknown config key '" + path + "'");
    if (dst[k].is_object()) {
      overlay(dst[k], v, path);
    } else {
      dst[k] = v;
    }
  }
}

}  // namespace

RunConfig config_from_json(const json& j) {
  json eff = config_to_json(RunConfig{});
  overlay(eff, j, "");
  RunConfig c;
  try {
    c.seed = eff.at("seed").get<std::uint64_t>();
    const auto& f = eff.at("features");
    c.features.depth = f.at("depth").get<std::size_t>();
    c.features.vol_window = f.at("vol_window").get<std::size_t>();
    c.features.vol_lag = f.at("vol_lag").get<std::size_t>();
    const auto& l = eff.at("labeller");
    c.labeller.t1 = l.at("t1").get<double>();
    c.labeller.t2 = l.at("t2").get<double>();
    c.labeller.t3 = l.at("t3").get<double>();
    c.labeller.horizon_ms = l.at("horizon_ms").get<std::int64_t>();
    const auto& w = eff.at("windows");
    c.windows.length = w.at("length").get<std::size_t>();
    c.windows.lookback_ms = w.at("lookback_ms").get<std::int64_t>();
    c.windows.gap_ms = w.at("gap_ms").get<std::int64_t>();
    c.windows.stride = w.at("stride").get<std::size_t>();
    c.split.train = w.at("split").at("train").get<double>();
    c.split.val = w.at("split").at("val").get<double>();
    c.split.test = w.at("split").at("test").get<double>();
    c.generate.scale = eff.at("generate").at("scale").get<double>();
    c.generate.max_rounds = eff.at("generate").at("max_rounds").get<std::size_t>();
    const auto& t = eff.at("train");
    c.train.layers = t.at("layers").get<std::size_t>();
    c.train.hidden = t.at("hidden").get<std::size_t>();
    c.train.head = t.at("head").get<std::size_t>();
    c.train.dropout = t.at("dropout").get<double>();
    c.train.lr = t.at("lr").get<double>();
    c.train.decay = t.at("decay").get<double>();
    c.train.epochs = t.at("epochs").get<std::size_t>();
    c.train.batch = t.at("batch").get<std::size_t>();
    c.train.pos_weight = t.at("pos_weight").get<double>();
    c.train.clip_norm = t.at("clip_norm").get<double>();
    c.train.parallel = t.at("parallel").get<bool>();
    const auto& s = eff.at("search");
    c.search.budget = s.at("budget").get<std::size_t>();
    c.search.space.layers = s.at("layers").get<std::vector<std::size_t>>();
    c.search.space.hidden = s.at("hidden").get<std::vector<std::size_t>>();
    c.search.space.dropout_min = s.at("dropout_min").get<double>();
    c.search.space.dropout_max = s.at("dropout_max").get<double>();
    c.search.space.lr_min = s.at("lr_min").get<double>();
    c.search.space.lr_max = s.at("lr_max").get<double>();
    c.search.space.epochs_min = s.at("epochs_min").get<std::size_t>();
    c.search.space.epochs_max = s.at("epochs_max").get<std::size_t>();
    c.eval_seeds = eff.at("eval").at("seeds").get<std::size_t>();
    c.tau = eff.at("eval").at("tau").get<double>();
    c.smoke.seeds = eff.at("smoke").at("seeds").get<std::size_t>();
    c.smoke.epochs = eff.at("smoke").at("epochs").get<std::size_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const RunConfig& c) {
  const std::string text = config_to_json(c).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

}  // namespace spoofdet
