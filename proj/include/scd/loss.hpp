#pragma once

#include <utility>
#include <vector>

#include "scd/mask.hpp"
#include "scd/tensor.hpp"

namespace scd {

// Inverse-frequency balance weights over the two classes:
// w_i = n_{1-i} / (n_0 + n_1). A single-class mask yields (0,1) or (1,0).
std::pair<double, double> class_weights(const LabelMap& gt);
std::pair<double, double> class_weights(const std::vector<const LabelMap*>& gts);

// Mean over pixels of w_{y(p)} * (-log softmax-probability of the true
// class); differentiable w.r.t. the logits.
template <typename T>
Tensor<T> weighted_ce_mean(const Tensor<T>& logits, const LabelMap& gt, double w0, double w1);

template <typename T>
struct LossReport {
  Tensor<T> total;                       // sum_k gamma^(M-k) * per_iteration[k]
  std::vector<double> per_iteration;     // unweighted per-iteration terms
  std::vector<double> iteration_weights; // gamma^(M-k), k = 1..M
  double gamma = 0;
  double w0 = 0, w1 = 0;
};

// Discounted sum of per-iteration weighted cross-entropies; the last
// iteration carries weight 1, earlier ones gamma^(M-k).
template <typename T>
LossReport<T> sequential_weighted_ce(const std::vector<Tensor<T>>& predictions,
                                     const LabelMap& gt, double gamma);

// Same, with externally supplied class weights (e.g. batch-level counts).
template <typename T>
LossReport<T> sequential_weighted_ce(const std::vector<Tensor<T>>& predictions,
                                     const LabelMap& gt, double gamma, double w0, double w1);

std::vector<double> iteration_weights(int iterations, double gamma);

}  // namespace scd
