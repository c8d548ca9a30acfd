#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spoofdet/features.hpp"
#include "spoofdet/windows.hpp"

namespace spoofdet::grunet {

struct GruShape {
  std::size_t input = kFeatureCount;
  std::size_t hidden = 32;
  std::size_t layers = 1;
  std::size_t head = 32;  // width of the feed-forward hidden layer

  void validate() const;
  friend bool operator==(const GruShape&, const GruShape&) = default;
};

/// Named slice of the flat parameter vector, row-major.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;
  std::size_t size() const noexcept { return rows * cols; }
  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;
};

/// Offsets of one GRU layer's parameters. Gate rows are stacked in the
/// order update (z), reset (r), candidate (h): W is 3H x I, U is 3H x H.
struct LayerOffsets {
  std::size_t input = 0;
  std::size_t W = 0;
  std::size_t U = 0;
  std::size_t b = 0;
  friend bool operator==(const LayerOffsets&, const LayerOffsets&) = default;
};

struct HeadOffsets {
  std::size_t W1 = 0;  // D x H
  std::size_t b1 = 0;  // D
  std::size_t w2 = 0;  // D
  std::size_t b2 = 0;  // 1
  friend bool operator==(const HeadOffsets&, const HeadOffsets&) = default;
};

/// Stacked GRU followed by tanh(W1 h + b1) -> w2 . a + b2 -> sigmoid.
/// All parameters live in one flat vector so optimizers and checkpoints
/// treat them uniformly.
class GruModel {
 public:
  GruModel() = default;
  explicit GruModel(GruShape shape);

  const GruShape& shape() const noexcept { return shape_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

  const LayerOffsets& layer(std::size_t l) const noexcept { return layers_[l]; }
  const HeadOffsets& head() const noexcept { return head_; }

  // Uniform(+-sqrt(1/H)) recurrent and input weights, uniform(+-sqrt(1/fan_in))
  // head weights, zero biases.
  void init(std::uint64_t seed);

  NormStats norm = NormStats::identity();
  double dropout = 0.0;  // training-time only

  friend bool operator==(const GruModel&, const GruModel&) = default;

 private:
  GruShape shape_;
  std::vector<double> params_;
  std::vector<ParamBlock> blocks_;
  std::vector<LayerOffsets> layers_;
  HeadOffsets head_;
};

}  // namespace spoofdet::grunet
