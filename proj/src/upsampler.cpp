#include "scd/upsampler.hpp"

#include <stdexcept>

namespace scd {

template <typename T>
Upsampler<T>::Upsampler(Tape<T>& tape, const std::string& name, int hidden_channels, Rng& rng)
    : hidden_ch_(hidden_channels) {
  int in_ch = hidden_channels;
  for (int i = 0; i < 4; ++i) {
    convs_[i] = Conv2d<T>(tape, name + ".block" + std::to_string(i), in_ch, kChannelSchedule[i],
                          3, 1, 1, rng);
    in_ch = kChannelSchedule[i];
  }
}

template <typename T>
Tensor<T> Upsampler<T>::operator()(const Tensor<T>& hidden, int target_h, int target_w) const {
  const Shape s = hidden.shape();
  if (s.c != hidden_ch_)
    throw std::invalid_argument("upsample: hidden has " + std::to_string(s.c) +
                                " channels, expected " + std::to_string(hidden_ch_));
  if (s.h * 16 != target_h || s.w * 16 != target_w)
    throw std::invalid_argument("upsample: hidden grid " + s.str() +
                                " is not 1/16 of target " + std::to_string(target_h) + "x" +
                                std::to_string(target_w));
  Tensor<T> x = hidden;
  for (int i = 0; i < 4; ++i) {
    x = convs_[i](x);
    if (i < 3) x = relu(x);
    x = bilinear_resize(x, x.shape().h * 2, x.shape().w * 2);
  }
  return x;
}

template class Upsampler<float>;
template class Upsampler<double>;

}  // namespace scd
