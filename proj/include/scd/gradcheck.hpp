#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scd/tensor.hpp"

namespace scd {

struct GradCheckRow {
  std::string op;
  double max_rel_err = 0;
  double tol = 0;
  bool pass = false;
};

struct GradCheckOptions {
  // Scales the analytic gradient of the named row by 1.5 so the comparison
  // fails; test fixture for the fault-injection contract.
  std::string corrupt_op;
  int e2e_samples_per_param = 5;
};

// Central finite differences at 64-bit over every differentiable op plus the
// end-to-end training loss of a small default-architecture model.
std::vector<GradCheckRow> run_gradcheck(std::uint64_t seed, const GradCheckOptions& opts = {});

bool gradcheck_all_pass(const std::vector<GradCheckRow>& rows);
std::string gradcheck_table(const std::vector<GradCheckRow>& rows);

// max over probes of ||g_analytic - g_fd||_inf / (||g_fd||_inf + 1e-8),
// finite differences taken over every entry of every probe
template <typename F>
double fd_max_rel_err(Tape<double>& tape, F&& forward, std::vector<Tensor<double>> probes,
                      double eps = 1e-3, double analytic_scale = 1.0) {
  Tensor<double> loss = forward();
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (const Tensor<double>& p : probes) analytic.push_back(p.grad());
  tape.clear_ops();

  double worst = 0;
  NoGradScope<double> guard(tape);
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    Tensor<double>& p = probes[pi];
    double max_diff = 0, max_fd = 0;
    for (std::size_t i = 0; i < p.value().size(); ++i) {
      const double saved = p.value()[i];
      p.value()[i] = saved + eps;
      const double up = forward().item();
      p.value()[i] = saved - eps;
      const double down = forward().item();
      p.value()[i] = saved;
      const double fd = (up - down) / (2 * eps);
      const double diff = std::abs(analytic[pi][i] * analytic_scale - fd);
      max_diff = std::max(max_diff, diff);
      max_fd = std::max(max_fd, std::abs(fd));
    }
    worst = std::max(worst, max_diff / (max_fd + 1e-8));
  }
  return worst;
}

}  // namespace scd
