#include "scd/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "scd/correlation.hpp"
#include "scd/data.hpp"
#include "scd/loss.hpp"
#include "scd/model.hpp"
#include "scd/rng.hpp"

namespace scd {

namespace {

std::vector<double> random_values(Rng& rng, std::int64_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

// random values bounded away from zero, for ops with a kink there
std::vector<double> random_values_off_zero(Rng& rng, std::int64_t n, double min_abs) {
  std::vector<double> v(n);
  for (double& x : v) {
    double y = rng.uniform(-1.0, 1.0);
    if (std::abs(y) < min_abs) y = y < 0 ? y - min_abs : y + min_abs;
    x = y;
  }
  return v;
}

// fixed random projection so the probe loss is sensitive to every entry
Tensor<double> projection_like(Rng& rng, const Shape& s) {
  Tensor<double> r(s);
  for (double& v : r.value()) v = rng.uniform(0.25, 1.0) * (rng.bernoulli(0.5) ? 1.0 : -1.0);
  return r;
}

template <typename MakeLoss>
GradCheckRow op_row(const std::string& name, double tol, const std::string& corrupt_op,
                    MakeLoss&& make) {
  GradCheckRow row;
  row.op = name;
  row.tol = tol;
  row.max_rel_err = make(name == corrupt_op ? 1.5 : 1.0);
  row.pass = row.max_rel_err < tol;
  return row;
}

double end_to_end_check(std::uint64_t seed, int samples_per_param, double corrupt_scale) {
  RunConfig cfg;
  cfg.image_size = 32;  // keeps the probe under the runtime budget
  cfg.seed = seed;

  Tape<double> tape;
  Rng rng(seed);
  ChangeModel<double> model(tape, cfg, rng);

  const SceneSpec spec;
  const ChangePair<double> pair =
      generate_pair<double>(Rng(seed).fork(99).next_u64(), cfg.image_size, cfg.image_size, spec);

  const auto forward = [&]() {
    const std::vector<Tensor<double>> preds = model.forward(pair.img0, pair.img1);
    return sequential_weighted_ce(preds, pair.gt, cfg.gamma).total;
  };

  Tensor<double> loss = forward();
  tape.backward(loss);
  std::vector<std::vector<double>> analytic;
  for (const auto& p : tape.parameters()) analytic.push_back(p.tensor.grad());
  tape.clear_ops();

  constexpr double kEps = 1e-3;
  double worst = 0;
  Rng pick(Rng(seed).fork(7).next_u64());
  NoGradScope<double> guard(tape);
  for (std::size_t pi = 0; pi < tape.parameters().size(); ++pi) {
    auto& tensor = tape.parameters()[pi].tensor;
    const std::int64_t n = tensor.numel();
    double analytic_inf = 0;
    for (double g : analytic[pi]) analytic_inf = std::max(analytic_inf, std::abs(g));
    double max_diff = 0, max_fd = 0;
    for (int s = 0; s < samples_per_param; ++s) {
      const std::size_t i = static_cast<std::size_t>(pick.next_u64() % n);
      auto& values = const_cast<Tensor<double>&>(tensor).value();
      const double saved = values[i];
      values[i] = saved + kEps;
      const double up = forward().item();
      values[i] = saved - kEps;
      const double down = forward().item();
      values[i] = saved;
      const double fd = (up - down) / (2 * kEps);
      max_diff = std::max(max_diff, std::abs(analytic[pi][i] * corrupt_scale - fd));
      max_fd = std::max(max_fd, std::abs(fd));
    }
    worst = std::max(worst, max_diff / (std::max(analytic_inf, max_fd) + 1e-8));
  }
  return worst;
}

}  // namespace

std::vector<GradCheckRow> run_gradcheck(std::uint64_t seed, const GradCheckOptions& opts) {
  constexpr double kOpTol = 1e-3;
  const std::string& corrupt = opts.corrupt_op;
  std::vector<GradCheckRow> rows;
  Rng root(seed);

  rows.push_back(op_row("conv2d", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(1);
    Tape<double> tape;
    auto x = tape.variable(Shape{2, 3, 5, 5}, random_values(rng, 2 * 3 * 5 * 5));
    auto w = tape.variable(Shape{4, 3, 3, 3}, random_values(rng, 4 * 3 * 3 * 3));
    auto b = tape.variable(Shape{1, 4, 1, 1}, random_values(rng, 4));
    auto r = projection_like(rng, Shape{2, 4, 5, 5});
    return fd_max_rel_err(
        tape, [&]() { return sum(mul(conv2d(x, w, b, 1, 1), r)); }, {x, w, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("sigmoid", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(2);
    Tape<double> tape;
    auto x = tape.variable(Shape{1, 3, 4, 4}, random_values(rng, 48));
    auto r = projection_like(rng, Shape{1, 3, 4, 4});
    return fd_max_rel_err(tape, [&]() { return sum(mul(sigmoid(x), r)); }, {x}, 1e-3, cs);
  }));

  rows.push_back(op_row("tanh", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(3);
    Tape<double> tape;
    auto x = tape.variable(Shape{1, 3, 4, 4}, random_values(rng, 48));
    auto r = projection_like(rng, Shape{1, 3, 4, 4});
    return fd_max_rel_err(tape, [&]() { return sum(mul(scd::tanh(x), r)); }, {x}, 1e-3, cs);
  }));

  rows.push_back(op_row("relu", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(4);
    Tape<double> tape;
    auto x = tape.variable(Shape{1, 3, 4, 4}, random_values_off_zero(rng, 48, 0.05));
    auto r = projection_like(rng, Shape{1, 3, 4, 4});
    return fd_max_rel_err(tape, [&]() { return sum(mul(relu(x), r)); }, {x}, 1e-3, cs);
  }));

  rows.push_back(op_row("softmax_channels", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(5);
    Tape<double> tape;
    auto x = tape.variable(Shape{1, 4, 3, 3}, random_values(rng, 36));
    auto r = projection_like(rng, Shape{1, 4, 3, 3});
    return fd_max_rel_err(tape, [&]() { return sum(mul(softmax_channels(x), r)); }, {x}, 1e-3,
                          cs);
  }));

  rows.push_back(op_row("bilinear_resize", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(6);
    Tape<double> tape;
    auto x = tape.variable(Shape{1, 2, 4, 5}, random_values(rng, 40));
    auto r_up = projection_like(rng, Shape{1, 2, 7, 9});
    auto r_down = projection_like(rng, Shape{1, 2, 3, 2});
    return fd_max_rel_err(
        tape,
        [&]() {
          return add(sum(mul(bilinear_resize(x, 7, 9), r_up)),
                     sum(mul(bilinear_resize(x, 3, 2), r_down)));
        },
        {x}, 1e-3, cs);
  }));

  rows.push_back(op_row("concat_channels", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(7);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto b = tape.variable(Shape{1, 3, 3, 3}, random_values(rng, 27));
    auto r = projection_like(rng, Shape{1, 5, 3, 3});
    return fd_max_rel_err(
        tape, [&]() { return sum(mul(concat_channels<double>({a, b}), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("add", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(8);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto b = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto r = projection_like(rng, Shape{1, 2, 3, 3});
    return fd_max_rel_err(tape, [&]() { return sum(mul(add(a, b), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("sub", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(9);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto b = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto r = projection_like(rng, Shape{1, 2, 3, 3});
    return fd_max_rel_err(tape, [&]() { return sum(mul(sub(a, b), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("mul", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(10);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto b = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto r = projection_like(rng, Shape{1, 2, 3, 3});
    return fd_max_rel_err(tape, [&]() { return sum(mul(mul(a, b), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("scale", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(11);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    auto r = projection_like(rng, Shape{1, 2, 3, 3});
    return fd_max_rel_err(tape, [&]() { return sum(mul(scale(a, 0.37), r)); }, {a}, 1e-3, cs);
  }));

  rows.push_back(op_row("sum", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(12);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 2, 3, 3}, random_values(rng, 18));
    return fd_max_rel_err(tape, [&]() { return sum(a); }, {a}, 1e-3, cs);
  }));

  rows.push_back(op_row("local_correlation", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(13);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 3, 5, 5}, random_values(rng, 75));
    auto b = tape.variable(Shape{1, 3, 5, 5}, random_values(rng, 75));
    auto r = projection_like(rng, Shape{1, 9, 5, 5});
    return fd_max_rel_err(
        tape, [&]() { return sum(mul(local_correlation(a, b, 1, 1), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("global_correlation", kOpTol, corrupt, [&](double cs) {
    Rng rng = root.fork(14);
    Tape<double> tape;
    auto a = tape.variable(Shape{1, 3, 4, 4}, random_values(rng, 48));
    auto b = tape.variable(Shape{1, 3, 4, 4}, random_values(rng, 48));
    auto r = projection_like(rng, Shape{1, 16, 4, 4});
    return fd_max_rel_err(
        tape, [&]() { return sum(mul(global_correlation(a, b), r)); }, {a, b}, 1e-3, cs);
  }));

  rows.push_back(op_row("weighted_ce", 1e-6, corrupt, [&](double cs) {
    Rng rng = root.fork(15);
    Tape<double> tape;
    auto logits = tape.variable(Shape{1, 2, 6, 6}, random_values(rng, 72));
    LabelMap gt(6, 6);
    for (auto& b : gt.v) b = rng.bernoulli(0.3) ? 1 : 0;
    const auto [w0, w1] = class_weights(gt);
    return fd_max_rel_err(
        tape, [&]() { return weighted_ce_mean(logits, gt, w0, w1); }, {logits}, 1e-4, cs);
  }));

  {
    GradCheckRow row;
    row.op = "end_to_end_loss";
    row.tol = 1e-2;
    row.max_rel_err = end_to_end_check(seed, opts.e2e_samples_per_param,
                                       row.op == corrupt ? 1.5 : 1.0);
    row.pass = row.max_rel_err < row.tol;
    rows.push_back(row);
  }
  return rows;
}

bool gradcheck_all_pass(const std::vector<GradCheckRow>& rows) {
  return std::all_of(rows.begin(), rows.end(), [](const GradCheckRow& r) { return r.pass; });
}

std::string gradcheck_table(const std::vector<GradCheckRow>& rows) {
  std::ostringstream out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-20s %14s %10s %6s\n", "op", "max_rel_err", "tol", "ok");
  out << line;
  for (const GradCheckRow& r : rows) {
    std::snprintf(line, sizeof(line), "%-20s %14.3e %10.0e %6s\n", r.op.c_str(), r.max_rel_err,
                  r.tol, r.pass ? "pass" : "FAIL");
    out << line;
  }
  return out.str();
}

}  // namespace scd
