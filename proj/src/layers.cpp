#include "scd/layers.hpp"

#include <cmath>
#include <vector>

namespace scd {

template <typename T>
Conv2d<T>::Conv2d(Tape<T>& tape, const std::string& name, int in_ch, int out_ch, int kernel,
                  int stride, int padding, Rng& rng)
    : in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), padding_(padding) {
  const int fan_in = in_ch * kernel * kernel;
  const double std_dev = std::sqrt(2.0 / fan_in);
  std::vector<T> w(static_cast<std::size_t>(out_ch) * fan_in);
  for (T& v : w) v = static_cast<T>(rng.normal() * std_dev);
  weight_ = tape.parameter(name + ".weight", Shape{out_ch, in_ch, kernel, kernel}, std::move(w));
  bias_ = tape.parameter(name + ".bias", Shape{1, out_ch, 1, 1},
                         std::vector<T>(static_cast<std::size_t>(out_ch), T(0)));
}

template <typename T>
Tensor<T> Conv2d<T>::operator()(const Tensor<T>& x) const {
  return conv2d(x, weight_, bias_, stride_, padding_);
}

template <typename T>
std::int64_t Conv2d<T>::parameter_count() const {
  return static_cast<std::int64_t>(out_ch_) * in_ch_ * kernel_ * kernel_ + out_ch_;
}

template <typename T>
std::int64_t Conv2d<T>::macs(int out_h, int out_w) const {
  return static_cast<std::int64_t>(out_ch_) * in_ch_ * kernel_ * kernel_ * out_h * out_w;
}

template class Conv2d<float>;
template class Conv2d<double>;

}  // namespace scd
