#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spoofdet/grunet/model.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet::grunet {

/// Inverted-dropout scale factors (0 or 1/(1-p)). `between[l]` masks the
/// output of layer l feeding layer l+1 (steps x H); `head` masks the final
/// hidden state feeding the feed-forward head.
struct DropoutMasks {
  std::vector<std::vector<double>> between;
  std::vector<double> head;
};

DropoutMasks sample_dropout(const GruShape& shape, std::size_t steps, double p, std::uint64_t seed);

/// Activations retained by the forward pass for backpropagation.
struct SequenceCache {
  std::size_t steps = 0;
  std::vector<std::vector<double>> input;  // per layer, steps x I_l
  std::vector<std::vector<double>> h;      // per layer, (steps + 1) x H, h[0] = 0
  std::vector<std::vector<double>> z;      // per layer, steps x H
  std::vector<std::vector<double>> r;
  std::vector<std::vector<double>> c;      // candidate state
  std::vector<double> head_in;             // H
  std::vector<double> a1;                  // D
  double logit = 0.0;
};

// (x - mean) / std per feature, step-major.
void normalize_window(const GruModel& model, const Window& w, std::vector<double>& out);

/// Runs the GRU stack over `x` (steps x input, already normalized) from a
/// zero hidden state and returns the head logit. Fills `cache` for backward.
double forward(const GruModel& model, std::span<const double> x, std::size_t steps,
               SequenceCache& cache, const DropoutMasks* masks = nullptr);

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(logit).
void backward(const GruModel& model, const SequenceCache& cache, const DropoutMasks* masks,
              double dlogit, std::span<double> grad);

double sigmoid(double v) noexcept;

inline constexpr double kProbClamp = 1e-7;

/// -[w y log p + (1 - y) log(1 - p)] with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y, double pos_weight) noexcept;
/// d(bce)/d(logit) where p = sigmoid(logit); zero where the clamp is active.
double bce_dlogit(double p, int y, double pos_weight) noexcept;

/// Probability for one raw (unnormalized) window, no dropout.
double predict(const GruModel& model, const Window& w);

struct BatchSpec {
  double pos_weight = 1.0;
  double dropout = 0.0;
  std::uint64_t dropout_seed = 0;  // per-window masks derive from this and the batch index
};

// Mean batch loss and its gradient (written to `grad`, resized to the
// parameter count). The serial version is the reference; the OpenMP
// version computes per-window gradients concurrently and reduces them in
// batch order, so both return bit-identical results.
double batch_gradient_serial(const GruModel& model, std::span<const Window* const> batch,
                             const BatchSpec& spec, std::vector<double>& grad);
double batch_gradient_parallel(const GruModel& model, std::span<const Window* const> batch,
                               const BatchSpec& spec, std::vector<double>& grad);

std::vector<double> predict_serial(const GruModel& model, std::span<const Window> windows);
std::vector<double> predict_parallel(const GruModel& model, std::span<const Window> windows);

}  // namespace spoofdet::grunet
