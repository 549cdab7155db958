#include "scd/mask.hpp"

#include <stdexcept>

namespace scd {

template <typename T>
LabelMap predict(const Tensor<T>& logits) {
  const Shape s = logits.shape();
  if (s.n != 1 || s.c != 2)
    throw std::invalid_argument("predict: expected (1,2,H,W) logits, got " + s.str());
  LabelMap m(s.h, s.w);
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const T* v = logits.value().data();
  for (std::size_t p = 0; p < plane; ++p) m.v[p] = v[plane + p] > v[p] ? 1 : 0;
  return m;
}

template <typename T>
double change_fraction(const Tensor<T>& logits) {
  return change_fraction(predict(logits));
}

double change_fraction(const LabelMap& labels) {
  if (labels.v.empty()) return 0.0;
  std::size_t n = 0;
  for (std::uint8_t b : labels.v) n += b;
  return static_cast<double>(n) / static_cast<double>(labels.v.size());
}

LabelMap crop(const LabelMap& m, int out_h, int out_w) {
  if (out_h > m.h || out_w > m.w)
    throw std::invalid_argument("crop: target larger than source label map");
  LabelMap out(out_h, out_w);
  for (int y = 0; y < out_h; ++y)
    for (int x = 0; x < out_w; ++x) out.at(y, x) = m.at(y, x);
  return out;
}

template LabelMap predict<float>(const Tensor<float>&);
template LabelMap predict<double>(const Tensor<double>&);
template double change_fraction<float>(const Tensor<float>&);
template double change_fraction<double>(const Tensor<double>&);

}  // namespace scd
