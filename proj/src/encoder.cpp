#include "scd/encoder.hpp"

#include <stdexcept>

namespace scd {

std::vector<int> default_tap_indices(int depth) {
  if (depth < 4)
    throw std::invalid_argument("encoder depth must be >= 4 to tap four sections, got " +
                                std::to_string(depth));
  std::vector<int> taps(4);
  for (int q = 0; q < 4; ++q) taps[q] = (q + 1) * depth / 4 - 1;
  return taps;
}

namespace {

void validate_taps(const std::vector<int>& taps, int depth) {
  if (taps.size() != 4)
    throw std::invalid_argument("tap rule must yield exactly 4 indices, got " +
                                std::to_string(taps.size()));
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (taps[i] < 0 || taps[i] >= depth)
      throw std::invalid_argument("tap index " + std::to_string(taps[i]) +
                                  " out of range for depth " + std::to_string(depth));
    if (i > 0 && taps[i] <= taps[i - 1])
      throw std::invalid_argument("tap indices must be strictly increasing");
  }
}

}  // namespace

template <typename T>
Encoder<T>::Encoder(Tape<T>& tape, const std::string& name, const EncoderConfig& config, Rng& rng)
    : config_(config) {
  const int cf = config.feature_channels;
  if (cf < 1) throw std::invalid_argument("feature_channels must be >= 1");
  taps_ = config.tap_override.empty() ? default_tap_indices(config.depth) : config.tap_override;
  validate_taps(taps_, config.depth);
  stem_[0] = Conv2d<T>(tape, name + ".stem0", 3, cf, 3, 2, 1, rng);
  for (int i = 1; i < 4; ++i)
    stem_[i] = Conv2d<T>(tape, name + ".stem" + std::to_string(i), cf, cf, 3, 2, 1, rng);
  blocks_.reserve(config.depth);
  for (int i = 0; i < config.depth; ++i) {
    Block b;
    b.conv1 = Conv2d<T>(tape, name + ".block" + std::to_string(i) + ".conv1", cf, cf, 3, 1, 1, rng);
    b.conv2 = Conv2d<T>(tape, name + ".block" + std::to_string(i) + ".conv2", cf, cf, 3, 1, 1, rng);
    blocks_.push_back(std::move(b));
  }
}

template <typename T>
FeaturePyramid<T> Encoder<T>::encode(const Tensor<T>& image) const {
  const Shape s = image.shape();
  if (s.c != 3)
    throw std::invalid_argument("encode: expected a 3-channel image, got shape " + s.str());
  if (s.h % 16 != 0 || s.w % 16 != 0)
    throw std::invalid_argument("encode: image height and width must be multiples of 16, got " +
                                s.str());
  Tensor<T> x = image;
  for (const Conv2d<T>& conv : stem_) x = relu(conv(x));
  FeaturePyramid<T> pyramid;
  int tapped = 0;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Block& b = blocks_[i];
    x = relu(add(x, b.conv2(relu(b.conv1(x)))));
    if (tapped < 4 && taps_[tapped] == static_cast<int>(i)) pyramid.levels[tapped++] = x;
  }
  return pyramid;
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace scd
