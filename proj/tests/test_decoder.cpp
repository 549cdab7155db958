#include <doctest.h>

#include <cmath>

#include "scd/decoder.hpp"
#include "scd/gradcheck.hpp"
#include "testutil.hpp"

using namespace scd;
using scd::test::bit_equal;
using scd::test::random_tensor;

namespace {

FeaturePyramid<double> pyramid_from(Rng& rng, Shape s) {
  FeaturePyramid<double> p;
  for (int i = 0; i < 4; ++i) p.levels[i] = random_tensor<double>(rng, s);
  return p;
}

template <typename T>
void zero_conv(Conv2d<T>& conv) {
  for (T& v : conv.weight().value()) v = T(0);
  for (T& v : conv.bias().value()) v = T(0);
}

template <typename T>
void zero_all(GruWeights<T>& w) {
  for (Conv2d<T>* c : {&w.wr, &w.ur, &w.fr, &w.wz, &w.uz, &w.fz, &w.wp, &w.up, &w.fp, &w.wc,
                       &w.uc, &w.fc}) {
    if (c->out_channels() > 0) zero_conv(*c);
  }
}

}  // namespace

TEST_CASE("identical pyramids with zero projection bias gate at exactly 0.5") {
  Tape<double> tape;
  Rng rng(1);
  RatiosForReflection<double> rfr(tape, "rfr", 4 * 3, 6, rng);
  auto p = pyramid_from(rng, Shape{1, 3, 4, 4});
  auto f = rfr(p, p);
  CHECK(f.shape() == Shape{1, 6, 4, 4});
  for (double v : f.value()) CHECK(v == 0.5);
}

TEST_CASE("the gating map always lands strictly inside (0, 1)") {
  Tape<double> tape;
  Rng rng(2);
  RatiosForReflection<double> rfr(tape, "rfr", 4 * 3, 5, rng);
  auto p0 = pyramid_from(rng, Shape{1, 3, 4, 4});
  auto p1 = pyramid_from(rng, Shape{1, 3, 4, 4});
  auto f = rfr(p0, p1);
  for (double v : f.value()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("ratios-for-reflection matches the straight-line composition bit-exactly") {
  Tape<double> tape;
  Rng rng(3);
  RatiosForReflection<double> rfr(tape, "rfr", 4 * 3, 5, rng);
  auto p0 = pyramid_from(rng, Shape{1, 3, 4, 4});
  auto p1 = pyramid_from(rng, Shape{1, 3, 4, 4});
  auto f = rfr(p0, p1);
  std::vector<Tensor<double>> diffs;
  for (int i = 0; i < 4; ++i) diffs.push_back(sub(p0.levels[i], p1.levels[i]));
  auto oracle = sigmoid(conv2d(concat_channels(diffs), rfr.projection().weight(),
                               rfr.projection().bias(), 1, 1));
  CHECK(bit_equal(f, oracle));
}

TEST_CASE("the all-zero-weight cell halves the previous state") {
  Tape<double> tape;
  Rng rng(4);
  GruWeights<double> w(tape, "gru", 5, 3, 2, GruVariant::ThreeGate, rng);
  zero_all(w);
  auto x = random_tensor<double>(rng, Shape{1, 5, 4, 4});
  auto f = random_tensor<double>(rng, Shape{1, 2, 4, 4}, 0.1, 0.9);
  auto h = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  GruState<double> state{h, 0, f};
  auto next = gru_cell(x, state, w);
  for (std::size_t i = 0; i < h.value().size(); ++i)
    CHECK(next.h.value()[i] == doctest::Approx(0.5 * h.value()[i]).epsilon(1e-15));
  CHECK(next.step == 1);
}

TEST_CASE("a large negative update-gate bias freezes the state") {
  Tape<double> tape;
  Rng rng(5);
  GruWeights<double> w(tape, "gru", 5, 3, 2, GruVariant::ThreeGate, rng);
  for (double& v : w.wz.bias().value()) v = -50.0;
  auto x = random_tensor<double>(rng, Shape{1, 5, 4, 4});
  auto f = random_tensor<double>(rng, Shape{1, 2, 4, 4}, 0.1, 0.9);
  auto h = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  auto next = gru_cell(x, GruState<double>{h, 0, f}, w);
  for (std::size_t i = 0; i < h.value().size(); ++i)
    CHECK(next.h.value()[i] == doctest::Approx(h.value()[i]).epsilon(1e-12));
}

TEST_CASE("a 1x1 scalar cell matches a hand computation of the recurrence") {
  Tape<double> tape;
  Rng rng(6);
  GruWeights<double> w(tape, "gru", 1, 1, 1, GruVariant::ThreeGate, rng);
  // 3x3 convs on a 1x1 grid reduce to the center weight; pick plain scalars
  const auto set_center = [](Conv2d<double>& c, double weight, double bias) {
    for (double& v : c.weight().value()) v = 0.0;
    if (c.kernel() == 3)
      c.weight().at(0, 0, 1, 1) = weight;
    else
      c.weight().at(0, 0, 0, 0) = weight;
    c.bias().value()[0] = bias;
  };
  set_center(w.wr, 0.3, 0.01);
  set_center(w.ur, -0.2, 0.02);
  set_center(w.fr, 0.1, 0.03);
  set_center(w.wz, 0.5, -0.01);
  set_center(w.uz, 0.4, -0.02);
  set_center(w.fz, -0.3, -0.03);
  set_center(w.wp, -0.6, 0.04);
  set_center(w.up, 0.7, 0.05);
  set_center(w.fp, 0.2, 0.06);
  set_center(w.wc, 0.8, -0.04);
  set_center(w.uc, -0.9, -0.05);
  set_center(w.fc, 0.15, -0.06);

  const double xv = 0.37, hv = -0.21, fv = 0.64;
  Tensor<double> x(Shape{1, 1, 1, 1}, {xv});
  Tensor<double> f(Shape{1, 1, 1, 1}, {fv});
  Tensor<double> h(Shape{1, 1, 1, 1}, {hv});
  auto next = gru_cell(x, GruState<double>{h, 0, f}, w);

  // independent scalar evaluation
  const auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const double r = sig(0.3 * xv + 0.01 + (-0.2) * hv + 0.02 + 0.1 * fv + 0.03);
  const double z = sig(0.5 * xv - 0.01 + 0.4 * hv - 0.02 + (-0.3) * fv - 0.03);
  const double p = sig(-0.6 * xv + 0.04 + 0.7 * hv + 0.05 + 0.2 * fv + 0.06);
  const double cand =
      std::tanh(0.8 * xv - 0.04 + (-0.9) * (r * hv) - 0.05 + 0.15 * (p * fv) - 0.06);
  const double expect = (1.0 - z) * hv + z * cand;
  CHECK(next.h.value()[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("zeroed feature convolutions reduce the three-gate cell to the basic cell") {
  Tape<double> tape;
  Rng rng(7);
  GruWeights<double> three(tape, "three", 4, 3, 2, GruVariant::ThreeGate, rng);
  GruWeights<double> basic(tape, "basic", 4, 3, 2, GruVariant::Basic, rng);
  for (auto pair : {std::pair{&basic.wr, &three.wr}, {&basic.ur, &three.ur},
                    {&basic.wz, &three.wz}, {&basic.uz, &three.uz}, {&basic.wc, &three.wc},
                    {&basic.uc, &three.uc}}) {
    pair.first->weight().value() = pair.second->weight().value();
    pair.first->bias().value() = pair.second->bias().value();
  }
  zero_conv(three.fr);
  zero_conv(three.fz);
  zero_conv(three.fc);
  auto x = random_tensor<double>(rng, Shape{1, 4, 4, 4});
  auto f = random_tensor<double>(rng, Shape{1, 2, 4, 4}, 0.1, 0.9);
  auto h = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  auto a = gru_cell(x, GruState<double>{h, 0, f}, three);
  auto b = gru_cell(x, GruState<double>{h, 0, f}, basic);
  CHECK(bit_equal(a.h, b.h));
}

TEST_CASE("rollouts stay inside the unit ball when h0 does") {
  Rng rng(8);
  for (int rep = 0; rep < 100; ++rep) {
    Tape<double> tape;
    Rng wrng = rng.fork(rep);
    GruWeights<double> w(tape, "gru", 3, 2, 2, GruVariant::ThreeGate, wrng);
    auto x = random_tensor<double>(wrng, Shape{1, 3, 3, 3}, -2, 2);
    auto f = random_tensor<double>(wrng, Shape{1, 2, 3, 3}, 0.05, 0.95);
    auto h0 = random_tensor<double>(wrng, Shape{1, 2, 3, 3}, -1, 1);
    const auto states = run_decoder(x, f, w, 10, h0);
    for (const auto& s : states)
      for (double v : s.h.value()) CHECK(std::abs(v) <= 1.0 + 1e-12);
  }
}

TEST_CASE("a longer rollout is a bitwise extension of a shorter one") {
  Tape<double> tape;
  Rng rng(9);
  GruWeights<double> w(tape, "gru", 3, 2, 2, GruVariant::ThreeGate, rng);
  auto x = random_tensor<double>(rng, Shape{1, 3, 3, 3});
  auto f = random_tensor<double>(rng, Shape{1, 2, 3, 3}, 0.1, 0.9);
  auto h0 = random_tensor<double>(rng, Shape{1, 2, 3, 3}, -1, 1);
  const auto long_run = run_decoder(x, f, w, 7, h0);
  const auto short_run = run_decoder(x, f, w, 5, h0);
  for (int t = 0; t < 5; ++t) CHECK(bit_equal(long_run[t].h, short_run[t].h));
}

TEST_CASE("the none variant is a single-shot feed-forward decoder") {
  Tape<double> tape;
  Rng rng(10);
  GruWeights<double> w(tape, "gru", 3, 2, 2, GruVariant::None, rng);
  auto x = random_tensor<double>(rng, Shape{1, 3, 3, 3});
  const auto states = run_decoder(x, Tensor<double>{}, w, 1, Tensor<double>{});
  REQUIRE(states.size() == 1);
  auto oracle = scd::tanh(conv2d(x, w.wn.weight(), w.wn.bias(), 1, 1));
  CHECK(bit_equal(states[0].h, oracle));
}

TEST_CASE("invalid iteration requests are rejected") {
  Tape<double> tape;
  Rng rng(11);
  GruWeights<double> w(tape, "gru", 3, 2, 2, GruVariant::ThreeGate, rng);
  GruWeights<double> none(tape, "none", 3, 2, 2, GruVariant::None, rng);
  auto x = random_tensor<double>(rng, Shape{1, 3, 3, 3});
  auto f = random_tensor<double>(rng, Shape{1, 2, 3, 3}, 0.1, 0.9);
  auto h0 = random_tensor<double>(rng, Shape{1, 2, 3, 3});
  CHECK_THROWS_AS(run_decoder(x, f, w, 0, h0), std::invalid_argument);
  CHECK_THROWS_AS(run_decoder(x, Tensor<double>{}, none, 3, Tensor<double>{}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gru_cell(x, GruState<double>{h0, 2, f}, none), std::invalid_argument);
}

TEST_CASE("gradients reach the update gate through every iteration") {
  Tape<double> tape;
  Rng rng(12);
  GruWeights<double> w(tape, "gru", 3, 2, 2, GruVariant::ThreeGate, rng);
  auto x = tape.variable(Shape{1, 3, 3, 3}, scd::test::random_values(rng, 27));
  auto f = sigmoid(tape.variable(Shape{1, 2, 3, 3}, scd::test::random_values(rng, 18)));
  auto h0 = random_tensor<double>(rng, Shape{1, 2, 3, 3}, -1, 1);
  auto r = random_tensor<double>(rng, Shape{1, 2, 3, 3});
  const auto loss = [&]() {
    const auto states = run_decoder(x, f, w, 3, h0);
    Tensor<double> acc;
    for (const auto& s : states) {
      auto term = sum(mul(s.h, r));
      acc = acc.defined() ? add(acc, term) : term;
    }
    return acc;
  };
  const double err = fd_max_rel_err(tape, loss, {w.wz.weight(), w.uc.weight(), x});
  CHECK(err < 1e-3);
  bool any_nonzero = false;
  tape.backward(loss());
  for (double g : w.wz.weight().grad()) any_nonzero |= g != 0.0;
  CHECK(any_nonzero);
}
