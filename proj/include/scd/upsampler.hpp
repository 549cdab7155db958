#pragma once

#include <array>
#include <string>

#include "scd/layers.hpp"
#include "scd/rng.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Restores 1/16-resolution hidden states to full-resolution two-class logits
// with four (3x3 conv -> x2 bilinear) blocks; channels go 256, 128, 64, 2,
// with ReLU after every conv except the final logit conv. One instance is
// shared across all decoder iterations.
template <typename T>
class Upsampler {
 public:
  Upsampler() = default;
  Upsampler(Tape<T>& tape, const std::string& name, int hidden_channels, Rng& rng);

  Tensor<T> operator()(const Tensor<T>& hidden, int target_h, int target_w) const;

  static constexpr std::array<int, 4> kChannelSchedule = {256, 128, 64, 2};

  const std::array<Conv2d<T>, 4>& convs() const { return convs_; }

 private:
  std::array<Conv2d<T>, 4> convs_;
  int hidden_ch_ = 0;
};

}  // namespace scd
