#include "scd/loss.hpp"

#include <cmath>
#include <stdexcept>

namespace scd {

namespace {

std::pair<std::uint64_t, std::uint64_t> count_classes(const LabelMap& gt) {
  std::uint64_t n1 = 0;
  for (std::uint8_t b : gt.v) {
    if (b > 1) throw std::invalid_argument("class_weights: labels must be 0 or 1");
    n1 += b;
  }
  return {gt.v.size() - n1, n1};
}

}  // namespace

std::pair<double, double> class_weights(const LabelMap& gt) {
  return class_weights(std::vector<const LabelMap*>{&gt});
}

std::pair<double, double> class_weights(const std::vector<const LabelMap*>& gts) {
  std::uint64_t n0 = 0, n1 = 0;
  for (const LabelMap* gt : gts) {
    const auto [a, b] = count_classes(*gt);
    n0 += a;
    n1 += b;
  }
  const std::uint64_t total = n0 + n1;
  if (total == 0) throw std::invalid_argument("class_weights: empty ground-truth mask");
  return {static_cast<double>(n1) / total, static_cast<double>(n0) / total};
}

template <typename T>
Tensor<T> weighted_ce_mean(const Tensor<T>& logits, const LabelMap& gt, double w0, double w1) {
  using OB = detail::OpBuilder<T>;
  const Shape s = logits.shape();
  if (s.n != 1 || s.c != 2)
    throw std::invalid_argument("weighted_ce_mean: expected (1,2,H,W) logits, got " + s.str());
  if (s.h != gt.h || s.w != gt.w)
    throw std::invalid_argument("weighted_ce_mean: logits " + s.str() +
                                " do not match ground truth " + std::to_string(gt.h) + "x" +
                                std::to_string(gt.w));

  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  Tape<T>* tape = OB::tape_for({&logits});
  Tensor<T> out = OB::output(tape, Shape{1, 1, 1, 1});

  const T* v = logits.value().data();
  double acc = 0;
  for (std::size_t p = 0; p < plane; ++p) {
    const double l0 = v[p], l1 = v[plane + p];
    const double m = std::max(l0, l1);
    const double lse = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    const int y = gt.v[p];
    const double ly = y == 0 ? l0 : l1;
    acc += (y == 0 ? w0 : w1) * (lse - ly);
  }
  out.value()[0] = static_cast<T>(acc / static_cast<double>(plane));

  if (tape) {
    auto ld = OB::data(logits);
    auto od = OB::data(out);
    OB::record(tape, [ld, od, gt, w0, w1, plane]() {
      if (od->grad.empty() || !ld->requires_grad) return;
      ld->ensure_grad();
      const T up = od->grad[0];
      const T* v = ld->value.data();
      const double inv_n = 1.0 / static_cast<double>(plane);
      for (std::size_t p = 0; p < plane; ++p) {
        const double l0 = v[p], l1 = v[plane + p];
        const double m = std::max(l0, l1);
        const double e0 = std::exp(l0 - m), e1 = std::exp(l1 - m);
        const double p1 = e1 / (e0 + e1);
        const int y = gt.v[p];
        const double wy = y == 0 ? w0 : w1;
        const double d1 = wy * (p1 - (y == 1 ? 1.0 : 0.0)) * inv_n;
        const double d0 = wy * ((1.0 - p1) - (y == 0 ? 1.0 : 0.0)) * inv_n;
        ld->grad[p] += up * static_cast<T>(d0);
        ld->grad[plane + p] += up * static_cast<T>(d1);
      }
    });
  }
  return out;
}

std::vector<double> iteration_weights(int iterations, double gamma) {
  std::vector<double> w(iterations);
  for (int k = 1; k <= iterations; ++k) w[k - 1] = std::pow(gamma, iterations - k);
  return w;
}

template <typename T>
LossReport<T> sequential_weighted_ce(const std::vector<Tensor<T>>& predictions,
                                     const LabelMap& gt, double gamma) {
  const auto [w0, w1] = class_weights(gt);
  return sequential_weighted_ce(predictions, gt, gamma, w0, w1);
}

template <typename T>
LossReport<T> sequential_weighted_ce(const std::vector<Tensor<T>>& predictions,
                                     const LabelMap& gt, double gamma, double w0, double w1) {
  if (predictions.empty())
    throw std::invalid_argument("sequential_weighted_ce: needs at least one prediction");
  if (!(gamma > 0.0 && gamma <= 1.0))
    throw std::invalid_argument("sequential_weighted_ce: gamma must be in (0, 1]");

  const int m = static_cast<int>(predictions.size());
  LossReport<T> report;
  report.gamma = gamma;
  report.w0 = w0;
  report.w1 = w1;
  report.iteration_weights = iteration_weights(m, gamma);

  Tensor<T> total;
  for (int k = 0; k < m; ++k) {
    Tensor<T> term = weighted_ce_mean(predictions[k], gt, w0, w1);
    report.per_iteration.push_back(static_cast<double>(term.item()));
    Tensor<T> weighted = scale(term, static_cast<T>(report.iteration_weights[k]));
    total = total.defined() ? add(total, weighted) : weighted;
  }
  report.total = total;
  return report;
}

#define SCD_INSTANTIATE(T)                                                                       \
  template Tensor<T> weighted_ce_mean<T>(const Tensor<T>&, const LabelMap&, double, double);    \
  template LossReport<T> sequential_weighted_ce<T>(const std::vector<Tensor<T>>&,               \
                                                   const LabelMap&, double);                    \
  template LossReport<T> sequential_weighted_ce<T>(const std::vector<Tensor<T>>&,               \
                                                   const LabelMap&, double, double, double);

SCD_INSTANTIATE(float)
SCD_INSTANTIATE(double)

#undef SCD_INSTANTIATE

}  // namespace scd
