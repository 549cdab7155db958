#pragma once

#include <array>
#include <string>
#include <vector>

#include "scd/layers.hpp"
#include "scd/rng.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Four same-resolution feature maps per image, tapped at increasing depth.
template <typename T>
struct FeaturePyramid {
  std::array<Tensor<T>, 4> levels;
};

struct EncoderConfig {
  int feature_channels = 32;
  // number of residual blocks at 1/16 resolution; taps default to the last
  // block of each quarter of this depth
  int depth = 4;
  std::vector<int> tap_override;  // empty -> derived from depth
  bool frozen = false;
};

// Last block of each quarter, zero-based: depth 12 -> {2, 5, 8, 11}.
std::vector<int> default_tap_indices(int depth);

// Strided stem to 1/16 resolution followed by residual blocks; applied with
// shared weights to both images of a pair.
template <typename T>
class Encoder {
 public:
  Encoder(Tape<T>& tape, const std::string& name, const EncoderConfig& config, Rng& rng);

  FeaturePyramid<T> encode(const Tensor<T>& image) const;

  const std::vector<int>& taps() const { return taps_; }
  const EncoderConfig& config() const { return config_; }

 private:
  struct Block {
    Conv2d<T> conv1, conv2;
  };
  EncoderConfig config_;
  std::array<Conv2d<T>, 4> stem_;
  std::vector<Block> blocks_;
  std::vector<int> taps_;
};

}  // namespace scd
