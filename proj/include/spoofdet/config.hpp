#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "spoofdet/eval.hpp"
#include "spoofdet/features.hpp"
#include "spoofdet/grunet/train.hpp"
#include "spoofdet/labeller.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet {

struct GenerateConfig {
  double scale = 1.0;           // fraction of the default episode count per sample
  std::size_t max_rounds = 60;  // labeller-verification re-rolls per sample
};

struct SearchConfig {
  std::size_t budget = 0;  // 0 = train with the fixed train section
  grunet::SearchSpace space;
};

struct SmokeConfig {
  std::size_t seeds = 1;
  std::size_t epochs = 6;
};

/// Every tunable of the pipeline. Loaded from a JSON file whose keys mirror
/// the fields below; missing keys keep their defaults, unknown keys are
/// rejected.
struct RunConfig {
  std::uint64_t seed = 1;  // master seed
  FeatureConfig features;
  Thresholds labeller;
  WindowConfig windows;
  SplitRatios split;
  GenerateConfig generate;
  grunet::TrainConfig train;
  SearchConfig search;
  std::size_t eval_seeds = 5;
  double tau = 0.5;
  SmokeConfig smoke;

  void validate() const;
  EvalConfig eval_config() const;
  /// Reduced budget: smoke.seeds training runs of smoke.epochs epochs.
  void apply_smoke();
};

nlohmann::json config_to_json(const RunConfig& c);
RunConfig config_from_json(const nlohmann::json& j);  // throws UsageError
RunConfig load_config(const std::filesystem::path& path);
std::string config_hash(const RunConfig& c);  // 16 hex digits of FNV-1a over the effective config

}  // namespace spoofdet
