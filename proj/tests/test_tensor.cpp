#include <doctest.h>

#include <cmath>

#include "scd/gradcheck.hpp"
#include "scd/tensor.hpp"
#include "testutil.hpp"

using namespace scd;
using scd::test::bit_equal;
using scd::test::random_tensor;

TEST_CASE("conv2d with a 1x1 identity kernel reproduces the input") {
  Rng rng(1);
  auto x = random_tensor<double>(rng, Shape{1, 3, 4, 5});
  Tensor<double> w(Shape{3, 3, 1, 1});
  for (int i = 0; i < 3; ++i) w.at(i, i, 0, 0) = 1.0;
  Tensor<double> b(Shape{1, 3, 1, 1});
  CHECK(bit_equal(conv2d(x, w, b, 1, 0), x));
}

TEST_CASE("conv2d all-ones 3x3 kernel on a constant field gives 9*C_in*c inside") {
  const double c = 0.7;
  auto x = Tensor<double>::full(Shape{1, 3, 6, 6}, c);
  auto w = Tensor<double>::ones(Shape{2, 3, 3, 3});
  Tensor<double> b(Shape{1, 2, 1, 1});
  auto y = conv2d(x, w, b, 1, 1);
  CHECK(y.shape() == Shape{1, 2, 6, 6});
  for (int oc = 0; oc < 2; ++oc)
    for (int i = 1; i < 5; ++i)
      for (int j = 1; j < 5; ++j) CHECK(y.at(0, oc, i, j) == doctest::Approx(9 * 3 * c).epsilon(1e-12));
}

TEST_CASE("conv2d output size follows floor((H + 2p - k)/s) + 1") {
  Rng rng(2);
  auto x = random_tensor<double>(rng, Shape{1, 2, 7, 9});
  auto w = random_tensor<double>(rng, Shape{4, 2, 3, 3});
  Tensor<double> b(Shape{1, 4, 1, 1});
  CHECK(conv2d(x, w, b, 2, 1).shape() == Shape{1, 4, 4, 5});
  CHECK(conv2d(x, w, b, 1, 0).shape() == Shape{1, 4, 5, 7});
}

TEST_CASE("conv2d rejects channel mismatches with a descriptive error") {
  Rng rng(3);
  auto x = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  auto w = random_tensor<double>(rng, Shape{2, 5, 3, 3});
  Tensor<double> b(Shape{1, 2, 1, 1});
  CHECK_THROWS_WITH_AS(conv2d(x, w, b, 1, 1), doctest::Contains("channels"),
                       std::invalid_argument);
}

TEST_CASE("conv2d gradients match finite differences over every entry") {
  // random 2x3x5x5 input against a 4x3x3x3 kernel
  Rng rng(4);
  Tape<double> tape;
  auto x = tape.variable(Shape{2, 3, 5, 5}, scd::test::random_values(rng, 150));
  auto w = tape.variable(Shape{4, 3, 3, 3}, scd::test::random_values(rng, 108));
  auto b = tape.variable(Shape{1, 4, 1, 1}, scd::test::random_values(rng, 4));
  auto r = random_tensor<double>(rng, Shape{2, 4, 5, 5});
  const double err = fd_max_rel_err(
      tape, [&]() { return sum(mul(conv2d(x, w, b, 1, 1), r)); }, {x, w, b});
  CHECK(err < 1e-3);
}

TEST_CASE("conv2d is linear in its input when bias is zero") {
  Rng rng(5);
  auto x = random_tensor<double>(rng, Shape{1, 2, 5, 5});
  auto y = random_tensor<double>(rng, Shape{1, 2, 5, 5});
  auto w = random_tensor<double>(rng, Shape{3, 2, 3, 3});
  Tensor<double> b(Shape{1, 3, 1, 1});
  const double a = 1.7, c = -0.4;
  Tensor<double> combo(Shape{1, 2, 5, 5});
  for (std::size_t i = 0; i < combo.value().size(); ++i)
    combo.value()[i] = a * x.value()[i] + c * y.value()[i];
  auto lhs = conv2d(combo, w, b, 1, 1);
  auto rx = conv2d(x, w, b, 1, 1);
  auto ry = conv2d(y, w, b, 1, 1);
  for (std::size_t i = 0; i < lhs.value().size(); ++i)
    CHECK(lhs.value()[i] ==
          doctest::Approx(a * rx.value()[i] + c * ry.value()[i]).epsilon(1e-10));
}

TEST_CASE("pointwise nonlinearities hit their exact anchor values") {
  auto z = Tensor<double>(Shape{1, 1, 1, 1});
  CHECK(sigmoid(z).item() == 0.5);
  CHECK(scd::tanh(z).item() == 0.0);
  auto two = Tensor<double>(Shape{1, 2, 2, 2});
  auto s = softmax_channels(two);
  for (double v : s.value()) CHECK(v == 0.5);
}

TEST_CASE("nonlinearities stay finite on extreme finite inputs") {
  Tensor<double> x(Shape{1, 2, 1, 2}, {1e4, -1e4, 700.0, -700.0});
  for (double v : sigmoid(x).value()) CHECK(std::isfinite(v));
  for (double v : scd::tanh(x).value()) CHECK(std::isfinite(v));
  for (double v : softmax_channels(x).value()) CHECK(std::isfinite(v));
}

TEST_CASE("softmax_channels sums to one per pixel") {
  Rng rng(6);
  auto x = random_tensor<double>(rng, Shape{2, 5, 3, 4}, -8, 8);
  auto y = softmax_channels(x);
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0;
        for (int c = 0; c < 5; ++c) s += y.at(n, c, i, j);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-6));
      }
}

TEST_CASE("bilinear_resize maps a constant field to a constant field") {
  auto x = Tensor<double>::full(Shape{1, 2, 3, 5}, 0.37);
  auto y = bilinear_resize(x, 9, 4);
  for (double v : y.value()) CHECK(v == doctest::Approx(0.37).epsilon(1e-12));
}

TEST_CASE("bilinear_resize 2x2 -> 2x4 with align-corners gives thirds") {
  Tensor<double> x(Shape{1, 1, 2, 2}, {0, 1, 0, 1});
  auto y = bilinear_resize(x, 2, 4);
  const double expect[4] = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  for (int row = 0; row < 2; ++row)
    for (int col = 0; col < 4; ++col)
      CHECK(y.at(0, 0, row, col) == doctest::Approx(expect[col]).epsilon(1e-12));
}

TEST_CASE("bilinear_resize at the identical size is the identity, bit for bit") {
  Rng rng(7);
  auto x = random_tensor<double>(rng, Shape{1, 3, 6, 7});
  CHECK(bit_equal(bilinear_resize(x, 6, 7), x));
}

TEST_CASE("concat_channels concatenates 3 + 5 channels into 8") {
  Rng rng(8);
  auto a = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  auto b = random_tensor<double>(rng, Shape{1, 5, 4, 4});
  auto y = concat_channels<double>({a, b});
  CHECK(y.shape() == Shape{1, 8, 4, 4});
  CHECK(y.at(0, 0, 2, 2) == a.at(0, 0, 2, 2));
  CHECK(y.at(0, 3, 2, 2) == b.at(0, 0, 2, 2));
}

TEST_CASE("concat_channels rejects spatial mismatches") {
  Tensor<double> a(Shape{1, 2, 4, 4}), b(Shape{1, 2, 4, 5});
  CHECK_THROWS_AS(concat_channels<double>({a, b}), std::invalid_argument);
}

TEST_CASE("concat_channels routes gradients to the matching slices") {
  Rng rng(9);
  Tape<double> tape;
  auto a = tape.variable(Shape{1, 2, 3, 3}, scd::test::random_values(rng, 18));
  auto b = tape.variable(Shape{1, 3, 3, 3}, scd::test::random_values(rng, 27));
  auto r = random_tensor<double>(rng, Shape{1, 5, 3, 3});
  const double err = fd_max_rel_err(
      tape, [&]() { return sum(mul(concat_channels<double>({a, b}), r)); }, {a, b});
  CHECK(err < 1e-3);
}

TEST_CASE("hadamard with ones is the identity") {
  Rng rng(10);
  auto x = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  CHECK(bit_equal(mul(x, Tensor<double>::ones(x.shape())), x));
}

TEST_CASE("elementwise ops reject shape mismatches") {
  Tensor<double> a(Shape{1, 2, 3, 3}), b(Shape{1, 2, 3, 4});
  CHECK_THROWS_AS(add(a, b), std::invalid_argument);
  CHECK_THROWS_AS(sub(a, b), std::invalid_argument);
  CHECK_THROWS_AS(mul(a, b), std::invalid_argument);
}

TEST_CASE("backward of sum(x) yields all-ones") {
  Rng rng(11);
  Tape<double> tape;
  auto x = tape.variable(Shape{1, 2, 3, 3}, scd::test::random_values(rng, 18));
  tape.backward(sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of sum(x*x)/2 yields x") {
  Rng rng(12);
  Tape<double> tape;
  auto x = tape.variable(Shape{1, 2, 3, 3}, scd::test::random_values(rng, 18));
  tape.backward(scale(sum(mul(x, x)), 0.5));
  for (std::size_t i = 0; i < x.value().size(); ++i)
    CHECK(x.grad()[i] == doctest::Approx(x.value()[i]).epsilon(1e-12));
}

TEST_CASE("a second backward call without reset accumulates gradients") {
  Tape<double> tape;
  auto x = tape.variable(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  auto loss = sum(x);
  tape.backward(loss);
  tape.backward(loss);
  for (double g : x.grad()) CHECK(g == 2.0);
}

TEST_CASE("backward rejects non-scalar and disconnected losses") {
  Tape<double> tape;
  auto x = tape.variable(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  CHECK_THROWS_AS(tape.backward(x), std::invalid_argument);
  Tensor<double> lone(Shape{1, 1, 1, 1});
  CHECK_THROWS_AS(tape.backward(lone), std::invalid_argument);
}

TEST_CASE("a parameter unused by the loss keeps an exactly-zero gradient") {
  Rng rng(13);
  Tape<double> tape;
  auto used = tape.parameter("used", Shape{1, 1, 2, 2}, scd::test::random_values(rng, 4));
  auto unused = tape.parameter("unused", Shape{1, 1, 2, 2}, scd::test::random_values(rng, 4));
  tape.backward(sum(mul(used, used)));
  for (double g : unused.grad()) CHECK(g == 0.0);
}

TEST_CASE("duplicate parameter names are rejected") {
  Tape<double> tape;
  tape.parameter("w", Shape{1, 1, 1, 1}, {0.0});
  CHECK_THROWS_AS(tape.parameter("w", Shape{1, 1, 1, 1}, {0.0}), std::invalid_argument);
}

TEST_CASE("recording can be suspended for inference") {
  Tape<double> tape;
  auto x = tape.variable(Shape{1, 1, 2, 2}, {1, 2, 3, 4});
  {
    NoGradScope<double> guard(tape);
    auto y = sigmoid(x);
    CHECK_FALSE(y.requires_grad());
  }
  CHECK(tape.op_count() == 0);
  auto y = sigmoid(x);
  CHECK(y.requires_grad());
  CHECK(tape.op_count() == 1);
}
