#pragma once

#include <cstdint>
#include <vector>

#include "scd/tensor.hpp"

namespace scd {

// Per-pixel class labels: 0 = static, 1 = change.
struct LabelMap {
  int h = 0, w = 0;
  std::vector<std::uint8_t> v;

  LabelMap() = default;
  LabelMap(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_, 0) {}

  std::uint8_t at(int y, int x) const { return v[static_cast<std::size_t>(y) * w + x]; }
  std::uint8_t& at(int y, int x) { return v[static_cast<std::size_t>(y) * w + x]; }
  std::size_t size() const { return v.size(); }
  bool operator==(const LabelMap&) const = default;
};

// Argmax over the two logit channels; ties go to static so a tie never
// fabricates change.
template <typename T>
LabelMap predict(const Tensor<T>& logits);

template <typename T>
double change_fraction(const Tensor<T>& logits);

double change_fraction(const LabelMap& labels);

LabelMap crop(const LabelMap& m, int out_h, int out_w);

}  // namespace scd
