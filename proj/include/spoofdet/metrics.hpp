#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <json.hpp>

namespace spoofdet {

/// Confusion counts and the rates derived from them. Rates whose
/// denominator is zero (single-class sets) are absent rather than 0.
struct Metrics {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double tau = 0.5;
  std::optional<double> accuracy;
  std::optional<double> weighted_accuracy;  // (TPR + TNR) / 2
  std::optional<double> fp_rate;            // fp / (fp + tn)
  std::optional<double> fn_rate;            // fn / (fn + tp)

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Classifies p >= tau as positive.
Metrics confusion_metrics(std::span<const double> probs, std::span<const int> labels, double tau = 0.5);

nlohmann::json metrics_to_json(const Metrics& m);

}  // namespace spoofdet
