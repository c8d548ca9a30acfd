#include "spoofdet/grunet/model.hpp"

#include <cmath>

#include "spoofdet/errors.hpp"
#include "spoofdet/random.hpp"

namespace spoofdet::grunet {

void GruShape::validate() const {
  if (input == 0 || hidden == 0 || layers == 0 || head == 0) {
    throw UsageError("GRU shape dimensions must be positive");
  }
}

GruModel::GruModel(GruShape shape) : shape_(shape) {
  shape_.validate();
  const std::size_t H = shape_.hidden;
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    blocks_.push_back({std::move(name), rows, cols, offset});
    const std::size_t at = offset;
    offset += rows * cols;
    return at;
  };
  static constexpr const char* kGates[3] = {"z", "r", "h"};
  for (std::size_t l = 0; l < shape_.layers; ++l) {
    const std::size_t I = l == 0 ? shape_.input : H;
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerOffsets lo;
    lo.input = I;
    for (int g = 0; g < 3; ++g) {
      const std::size_t at = add(p + "W_" + kGates[g], H, I);
      if (g == 0) lo.W = at;
    }
    for (int g = 0; g < 3; ++g) {
      const std::size_t at = add(p + "U_" + kGates[g], H, H);
      if (g == 0) lo.U = at;
    }
    for (int g = 0; g < 3; ++g) {
      const std::size_t at = add(p + "b_" + kGates[g], H, 1);
      if (g == 0) lo.b = at;
    }
    layers_.push_back(lo);
  }
  head_.W1 = add("head.W1", shape_.head, H);
  head_.b1 = add("head.b1", shape_.head, 1);
  head_.w2 = add("head.w2", 1, shape_.head);
  head_.b2 = add("head.b2", 1, 1);
  params_.assign(offset, 0.0);
}

void GruModel::init(std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x6E17));
  const double rec = std::sqrt(1.0 / static_cast<double>(shape_.hidden));
  auto fill = [&](const ParamBlock& b, double scale) {
    for (std::size_t i = 0; i < b.size(); ++i) {
      params_[b.offset + i] = (2.0 * uniform01(rng) - 1.0) * scale;
    }
  };
  for (const ParamBlock& b : blocks_) {
    const bool bias = b.name.find(".b") != std::string::npos;
    if (bias) {
      for (std::size_t i = 0; i < b.size(); ++i) params_[b.offset + i] = 0.0;
    } else if (b.name.rfind("head.", 0) == 0) {
      fill(b, std::sqrt(1.0 / static_cast<double>(b.cols)));
    } else {
      fill(b, rec);
    }
  }
}

}  // namespace spoofdet::grunet
