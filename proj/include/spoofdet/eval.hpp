#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spoofdet/grunet/model.hpp"
#include "spoofdet/grunet/train.hpp"
#include "spoofdet/metrics.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet {

/// Predicts every window and scores it against its label at threshold tau.
/// The model is not modified.
Metrics evaluate(const grunet::GruModel& model, std::span<const Window> windows, double tau = 0.5,
                 bool parallel = true);

struct EvalConfig {
  std::size_t seeds = 5;  // training repetitions per matrix row / pooled run
  double tau = 0.5;
  std::uint64_t seed = 1;
  grunet::TrainConfig train;

  void validate() const;
};

nlohmann::json eval_config_to_json(const EvalConfig& c);

struct NamedSplit {
  std::string name;
  DatasetSplit split;
};

/// One training run and its scores on every sample's test split.
struct EvalRun {
  std::size_t train_sample = 0;  // matrix row; unused for pooled runs
  std::size_t seed_index = 0;
  std::uint64_t seed = 0;
  std::optional<std::string> error;
  std::optional<std::size_t> best_epoch;
  std::vector<Metrics> tests;  // one per sample, empty on failure
};

struct MatrixReport {
  std::vector<std::string> names;
  std::size_t seeds = 0;
  std::vector<EvalRun> runs;
  // Mean weighted accuracy over seeds; nullopt marks a failed cell.
  std::vector<std::vector<std::optional<double>>> cells;
  std::vector<std::optional<double>> row_average;
  std::vector<std::optional<double>> column_average;
  std::optional<double> overall;
};

/// Recomputes cells and averages from the runs. Averages skip failed cells.
void aggregate(MatrixReport& r);

/// Trains `cfg.seeds` models per sample (train + validation of that sample)
/// and tests each on every sample's test split. Failed runs mark their row.
MatrixReport cross_sample_matrix(std::span<const NamedSplit> samples, const EvalConfig& cfg);

struct PooledCell {
  std::optional<double> fp_rate;
  std::optional<double> fn_rate;
  std::optional<double> weighted_accuracy;
  std::optional<double> accuracy;
};

struct PooledReport {
  std::vector<std::string> names;
  std::size_t seeds = 0;
  std::size_t train_size = 0;
  std::size_t val_size = 0;
  std::vector<EvalRun> runs;
  std::vector<PooledCell> per_sample;  // means over successful runs
  PooledCell average;                  // mean of the per-sample cells
};

void aggregate(PooledReport& r);

/// Trains on the concatenated train and validation splits of all samples and
/// tests on each sample separately.
PooledReport pooled_eval(std::span<const NamedSplit> samples, const EvalConfig& cfg);

nlohmann::json matrix_to_json(const MatrixReport& r);
MatrixReport matrix_from_json(const nlohmann::json& j);
nlohmann::json pooled_to_json(const PooledReport& r);
PooledReport pooled_from_json(const nlohmann::json& j);
Metrics metrics_from_json(const nlohmann::json& j);

}  // namespace spoofdet
