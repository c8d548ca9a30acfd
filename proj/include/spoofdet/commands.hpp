#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spoofdet/config.hpp"
#include "spoofdet/eval.hpp"
#include "spoofdet/report.hpp"

namespace spoofdet {

namespace fs = std::filesystem;

// Every command writes its artifacts plus a manifest.json (effective config,
// config hash, inputs and summary counts) into `out`, and returns the
// manifest. Manifests carry no wall-clock data so reruns compare equal.

/// Four benchmark samples: <out>/<name>/{stream.ndjson,truth.json,scenario.json,flags.ndjson}.
nlohmann::json cmd_generate(const RunConfig& cfg, const fs::path& out);

/// Replays a stream and writes flags.ndjson with the book anomaly counters.
nlohmann::json cmd_label(const RunConfig& cfg, const fs::path& stream, const fs::path& out);

/// Windows, split and down-sampling into a dataset archive.
nlohmann::json cmd_dataset(const RunConfig& cfg, const fs::path& stream, const fs::path& flags,
                           const fs::path& out);

/// model.ckpt + history.json; runs a random search first when search.budget > 0.
nlohmann::json cmd_train(const RunConfig& cfg, const fs::path& dataset, const fs::path& out);

/// metrics.json for one split ("train", "val" or "test") of an archive.
nlohmann::json cmd_eval(const RunConfig& cfg, const fs::path& model, const fs::path& dataset,
                        const std::string& split, const fs::path& out);

/// Loads (or, without `data`, generates) the benchmark and labels each sample.
struct Benchmark {
  std::vector<NamedSplit> samples;
  std::vector<SampleSummary> summaries;
};
Benchmark load_benchmark(const RunConfig& cfg, const std::optional<fs::path>& data);

/// Cross-sample matrix and pooled evaluation with their tables.
nlohmann::json cmd_matrix(const RunConfig& cfg, const std::optional<fs::path>& data, const fs::path& out);

/// One SVG per flag of the stream (flags are recomputed when not given), and
/// re-rendered tables when `results` holds matrix.json / pooled.json.
nlohmann::json cmd_report(const RunConfig& cfg, const fs::path& stream, const std::optional<fs::path>& flags,
                          const std::optional<fs::path>& results, const fs::path& out);

}  // namespace spoofdet
