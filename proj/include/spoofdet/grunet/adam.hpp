#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spoofdet::grunet {

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  explicit AdamState(std::size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update of `params` in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads, double lr);

/// eta0 * gamma^epoch
double decayed_lr(double lr0, double gamma, std::size_t epoch) noexcept;

/// Scales `grads` so their global L2 norm is at most `max_norm`; returns
/// the norm before scaling.
double clip_global_norm(std::span<double> grads, double max_norm) noexcept;

}  // namespace spoofdet::grunet
