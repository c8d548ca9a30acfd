#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spoofdet/eval.hpp"
#include "spoofdet/features.hpp"
#include "spoofdet/labeller.hpp"

namespace spoofdet {

// Train sample per row, test sample per column, row/column averages.
std::string format_matrix_text(const MatrixReport& r);
std::string format_matrix_csv(const MatrixReport& r);

// FP rate, FN rate, weighted accuracy and raw accuracy per test sample.
std::string format_pooled_text(const PooledReport& r);
std::string format_pooled_csv(const PooledReport& r);

struct SampleSummary {
  std::string name;
  LabelCounts overall;
  LabelCounts train;  // after down-sampling
  double target_frequency = 0.0;
};

std::string format_samples_text(std::span<const SampleSummary> rows);

/// Three stacked panels (mid price, volatility variation, delta volume)
/// over [t0 - before_ms, t0 + after_ms] with the flag marked.
std::string plot_flag_svg(std::span<const FeatureFrame> frames, const SpoofingFlag& flag,
                          std::int64_t before_ms = 15000, std::int64_t after_ms = 5000);

}  // namespace spoofdet
