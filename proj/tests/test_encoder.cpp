#include <doctest.h>

#include "scd/encoder.hpp"
#include "testutil.hpp"

using namespace scd;
using scd::test::bit_equal;
using scd::test::random_tensor;

TEST_CASE("a 64x64 image with 32 feature channels yields four (1,32,4,4) levels") {
  Tape<float> tape;
  Rng rng(1);
  Encoder<float> enc(tape, "encoder", EncoderConfig{}, rng);
  auto img = random_tensor<float>(rng, Shape{1, 3, 64, 64}, 0, 1);
  const FeaturePyramid<float> p = enc.encode(img);
  for (const auto& level : p.levels) CHECK(level.shape() == Shape{1, 32, 4, 4});
}

TEST_CASE("all four levels share one shape for any valid input") {
  Tape<float> tape;
  Rng rng(2);
  EncoderConfig cfg;
  cfg.feature_channels = 12;
  cfg.depth = 8;
  Encoder<float> enc(tape, "encoder", cfg, rng);
  auto img = random_tensor<float>(rng, Shape{1, 3, 48, 80}, 0, 1);
  const FeaturePyramid<float> p = enc.encode(img);
  for (const auto& level : p.levels) CHECK(level.shape() == Shape{1, 12, 3, 5});
}

TEST_CASE("identical images produce identical pyramids (siamese application)") {
  Tape<float> tape;
  Rng rng(3);
  Encoder<float> enc(tape, "encoder", EncoderConfig{}, rng);
  auto img = random_tensor<float>(rng, Shape{1, 3, 32, 32}, 0, 1);
  const FeaturePyramid<float> a = enc.encode(img);
  const FeaturePyramid<float> b = enc.encode(img);
  for (int i = 0; i < 4; ++i) CHECK(bit_equal(a.levels[i], b.levels[i]));
}

TEST_CASE("default tap rule picks the last block of each quarter") {
  CHECK(default_tap_indices(8) == std::vector<int>{1, 3, 5, 7});
  CHECK(default_tap_indices(12) == std::vector<int>{2, 5, 8, 11});
  CHECK(default_tap_indices(4) == std::vector<int>{0, 1, 2, 3});
  CHECK_THROWS_AS(default_tap_indices(3), std::invalid_argument);
}

TEST_CASE("tap overrides must be four strictly increasing in-range indices") {
  Tape<float> tape;
  Rng rng(4);
  EncoderConfig cfg;
  cfg.depth = 6;
  cfg.tap_override = {0, 2, 2, 5};
  CHECK_THROWS_AS(Encoder<float>(tape, "encoder", cfg, rng), std::invalid_argument);
  cfg.tap_override = {0, 2, 4, 6};
  Tape<float> tape2;
  CHECK_THROWS_AS(Encoder<float>(tape2, "e2", cfg, rng), std::invalid_argument);
}

TEST_CASE("images not divisible by 16 are rejected with the required multiple") {
  Tape<float> tape;
  Rng rng(5);
  Encoder<float> enc(tape, "encoder", EncoderConfig{}, rng);
  Tensor<float> img(Shape{1, 3, 60, 64});
  CHECK_THROWS_WITH_AS(enc.encode(img), doctest::Contains("16"), std::invalid_argument);
}

TEST_CASE("conv parameter and MAC counting follow the closed forms") {
  Tape<float> tape;
  Rng rng(6);
  Conv2d<float> conv(tape, "c", 4, 8, 3, 1, 1, rng);
  CHECK(conv.parameter_count() == 296);           // 8*(4*9) + 8
  CHECK(2 * conv.macs(16, 16) == 147456);         // 2*(8*4*9)*256
}

TEST_CASE("registered encoder parameters add up to the closed-form count") {
  Tape<float> tape;
  Rng rng(7);
  EncoderConfig cfg;
  Encoder<float> enc(tape, "encoder", cfg, rng);
  std::int64_t registry = 0;
  for (const auto& p : tape.parameters()) registry += p.tensor.numel();
  const int cf = cfg.feature_channels;
  std::int64_t expect = static_cast<std::int64_t>(cf) * 3 * 9 + cf;  // stem0
  expect += 3 * (static_cast<std::int64_t>(cf) * cf * 9 + cf);       // stem1..3
  expect += cfg.depth * 2 * (static_cast<std::int64_t>(cf) * cf * 9 + cf);
  CHECK(registry == expect);
}
