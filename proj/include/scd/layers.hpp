#pragma once

#include <string>

#include "scd/rng.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Convolution layer owning tape-registered weight and bias. Weights use
// Kaiming fan-in scaling, biases start at zero.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(Tape<T>& tape, const std::string& name, int in_ch, int out_ch, int kernel, int stride,
         int padding, Rng& rng);

  Tensor<T> operator()(const Tensor<T>& x) const;

  const Tensor<T>& weight() const { return weight_; }
  const Tensor<T>& bias() const { return bias_; }
  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }

  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int kernel() const { return kernel_; }
  int stride() const { return stride_; }
  int padding() const { return padding_; }

  std::int64_t parameter_count() const;
  // multiply-accumulates for one application at the given output size
  std::int64_t macs(int out_h, int out_w) const;

 private:
  Tensor<T> weight_, bias_;
  int in_ch_ = 0, out_ch_ = 0, kernel_ = 0, stride_ = 1, padding_ = 0;
};

}  // namespace scd
