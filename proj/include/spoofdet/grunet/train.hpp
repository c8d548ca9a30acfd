#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "spoofdet/grunet/model.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet::grunet {

struct TrainConfig {
  std::size_t layers = 1;
  std::size_t hidden = 32;
  std::size_t head = 32;
  double dropout = 0.1;
  double lr = 3e-3;
  double decay = 0.95;
  std::size_t epochs = 20;
  std::size_t batch = 32;
  std::uint64_t seed = 1;
  double pos_weight = 1.0;
  double clip_norm = 5.0;
  bool parallel = true;  // OpenMP batch kernels; results are identical either way

  void validate() const;
  GruShape shape() const { return {kFeatureCount, hidden, layers, head}; }
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json train_config_to_json(const TrainConfig& c);

struct EpochRecord {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> val_accuracy;
  std::optional<double> val_weighted_accuracy;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  GruModel model;  // parameters from the best validation epoch
  std::vector<EpochRecord> history;
  std::optional<std::size_t> best_epoch;
};

nlohmann::json history_to_json(const std::vector<EpochRecord>& h);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains on `data.train`, selects on `data.val` by weighted accuracy
/// (validation loss breaks ties and covers single-class validation sets).
/// Normalization statistics come from the training windows. Throws
/// DivergenceError on a non-finite loss.
TrainResult train(const DatasetSplit& data, const TrainConfig& cfg, const EpochCallback& on_epoch = {});

struct SearchSpace {
  std::vector<std::size_t> layers{1, 2, 3};
  std::vector<std::size_t> hidden{32, 64, 128};
  double dropout_min = 0.0;
  double dropout_max = 0.5;
  double lr_min = 1e-4;
  double lr_max = 1e-2;
  std::size_t epochs_min = 20;
  std::size_t epochs_max = 100;
};

struct SearchTrial {
  TrainConfig config;
  double score = 0.0;  // best validation weighted accuracy (0 when not computable)
};

struct SearchResult {
  TrainConfig best;
  std::vector<SearchTrial> trials;
};

/// Draws `budget` configurations (layers/hidden uniform over the sets,
/// dropout uniform, lr log-uniform, epochs uniform integer) on top of
/// `base`, trains each and returns the one with the best validation score.
SearchResult random_search(const SearchSpace& space, std::size_t budget, const DatasetSplit& data,
                           const TrainConfig& base, std::uint64_t seed);

}  // namespace spoofdet::grunet
