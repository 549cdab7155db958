#include <doctest.h>

#include <cmath>
#include <vector>

#include "scd/correlation.hpp"
#include "scd/gradcheck.hpp"
#include "testutil.hpp"

using namespace scd;
using scd::test::random_tensor;

namespace {

// Literal transcription of the displacement-indexed patch correlation; kept
// independent of the implementation on purpose.
Tensor<double> brute_local(const Tensor<double>& m0, const Tensor<double>& m1, int r, int pr) {
  const Shape s = m0.shape();
  const int side = 2 * r + 1;
  Tensor<double> out(Shape{s.n, side * side, s.h, s.w});
  const double norm = 1.0 / (s.c * (2 * pr + 1) * (2 * pr + 1));
  const auto value = [&](const Tensor<double>& t, int n, int c, int y, int x) {
    if (y < 0 || y >= s.h || x < 0 || x >= s.w) return 0.0;
    return t.at(n, c, y, x);
  };
  for (int n = 0; n < s.n; ++n)
    for (int dy = -r; dy <= r; ++dy)
      for (int dx = -r; dx <= r; ++dx)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) {
            double acc = 0;
            for (int oy = -pr; oy <= pr; ++oy)
              for (int ox = -pr; ox <= pr; ++ox)
                for (int c = 0; c < s.c; ++c)
                  acc += value(m0, n, c, y + oy, x + ox) *
                         value(m1, n, c, y + dy + oy, x + dx + ox);
            out.at(n, (dy + r) * side + (dx + r), y, x) = acc * norm;
          }
  return out;
}

Tensor<double> brute_global(const Tensor<double>& m0, const Tensor<double>& m1) {
  const Shape s = m0.shape();
  Tensor<double> out(Shape{s.n, s.h * s.w, s.h, s.w});
  for (int n = 0; n < s.n; ++n)
    for (int ky = 0; ky < s.h; ++ky)
      for (int kx = 0; kx < s.w; ++kx)
        for (int y = 0; y < s.h; ++y)
          for (int x = 0; x < s.w; ++x) {
            double acc = 0;
            for (int c = 0; c < s.c; ++c) acc += m0.at(n, c, y, x) * m1.at(n, c, ky, kx);
            out.at(n, ky * s.w + kx, y, x) = acc / s.c;
          }
  return out;
}

}  // namespace

TEST_CASE("zero-displacement self-correlation of unit-norm features is 1/C") {
  // every pixel carries the vector (0.5, 0.5, 0.5, 0.5): unit norm, C = 4
  auto m = Tensor<double>::full(Shape{1, 4, 3, 3}, 0.5);
  auto out = local_correlation(m, m, 0, 0);
  CHECK(out.shape() == Shape{1, 1, 3, 3});
  for (double v : out.value()) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("radius 1 yields (2r+1)^2 = 9 channels") {
  Rng rng(1);
  auto m0 = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  auto m1 = random_tensor<double>(rng, Shape{1, 3, 4, 4});
  CHECK(local_correlation(m0, m1, 1, 0).shape().c == 9);
}

TEST_CASE("local correlation matches the brute-force oracle bit-exactly") {
  Rng rng(2);
  // the spec's 1x3x5x5 r=2 instance plus a sweep over radii and patch radii
  for (int r : {0, 1, 2, 3}) {
    for (int pr : {0, 1}) {
      for (int rep = 0; rep < 5; ++rep) {
        auto m0 = random_tensor<double>(rng, Shape{1, 3, 5, 5});
        auto m1 = random_tensor<double>(rng, Shape{1, 3, 5, 5});
        auto got = local_correlation(m0, m1, r, pr);
        auto want = brute_local(m0, m1, r, pr);
        REQUIRE(got.shape() == want.shape());
        for (std::size_t i = 0; i < got.value().size(); ++i)
          CHECK(got.value()[i] == want.value()[i]);
      }
    }
  }
}

TEST_CASE("global correlation on a 1x1 grid equals local r=0") {
  Rng rng(3);
  auto m0 = random_tensor<double>(rng, Shape{1, 5, 1, 1});
  auto m1 = random_tensor<double>(rng, Shape{1, 5, 1, 1});
  CHECK(global_correlation(m0, m1).value()[0] == local_correlation(m0, m1, 0, 0).value()[0]);
}

TEST_CASE("a constant m1 makes all global channels equal at each pixel") {
  Rng rng(4);
  auto m0 = random_tensor<double>(rng, Shape{1, 3, 3, 3});
  auto m1 = Tensor<double>::full(Shape{1, 3, 3, 3}, 0.4);
  auto out = global_correlation(m0, m1);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      for (int k = 1; k < 9; ++k)
        CHECK(out.at(0, k, y, x) == doctest::Approx(out.at(0, 0, y, x)).epsilon(1e-15));
}

TEST_CASE("global correlation matches the brute-force oracle bit-exactly") {
  Rng rng(5);
  auto m0 = random_tensor<double>(rng, Shape{1, 2, 4, 4});
  auto m1 = random_tensor<double>(rng, Shape{1, 2, 4, 4});
  auto got = global_correlation(m0, m1);
  auto want = brute_global(m0, m1);
  for (std::size_t i = 0; i < got.value().size(); ++i)
    CHECK(got.value()[i] == want.value()[i]);
}

TEST_CASE("shifting both inputs shifts the local correlation volume (interior)") {
  Rng rng(6);
  const int h = 6, w = 6, r = 1;
  auto m0 = random_tensor<double>(rng, Shape{1, 3, h, w});
  auto m1 = random_tensor<double>(rng, Shape{1, 3, h, w});
  Tensor<double> s0(m0.shape()), s1(m1.shape());
  for (int c = 0; c < 3; ++c)
    for (int y = 0; y < h - 1; ++y)
      for (int x = 0; x < w - 1; ++x) {
        s0.at(0, c, y + 1, x + 1) = m0.at(0, c, y, x);
        s1.at(0, c, y + 1, x + 1) = m1.at(0, c, y, x);
      }
  auto base = local_correlation(m0, m1, r, 0);
  auto shifted = local_correlation(s0, s1, r, 0);
  // pixels whose whole displacement window stays interior in both volumes
  for (int ch = 0; ch < 9; ++ch)
    for (int y = r + 1; y < h - 1 - r; ++y)
      for (int x = r + 1; x < w - 1 - r; ++x)
        CHECK(shifted.at(0, ch, y + 1, x + 1) == doctest::Approx(base.at(0, ch, y, x)).epsilon(1e-15));
}

namespace {

FeaturePyramid<double> pyramid_from(Tape<double>* tape, Rng& rng, Shape s) {
  FeaturePyramid<double> p;
  for (int i = 0; i < 4; ++i) {
    auto t = random_tensor<double>(rng, s);
    p.levels[i] = tape ? tape->variable(s, t.value()) : t;
  }
  return p;
}

}  // namespace

TEST_CASE("fused channel counts follow the mode shape laws") {
  Tape<double> tape;
  Rng rng(7);
  const auto channels = [&](FusionMode mode, int radius, bool top_only) {
    Tape<double> local_tape;
    Rng local_rng(8);
    FusionModule<double> fusion(local_tape, "fusion", 6, 8, mode, radius, 0, top_only, local_rng);
    auto p0 = pyramid_from(nullptr, local_rng, Shape{1, 6, 4, 4});
    auto p1 = pyramid_from(nullptr, local_rng, Shape{1, 6, 4, 4});
    const FusedFeature<double> fused = fusion.fuse(p0, p1);
    CHECK(fused.values.shape().c == fusion.fused_channels(4, 4));
    return fused.values.shape().c;
  };
  CHECK(channels(FusionMode::FeatureMapsOnly, 1, false) == 64);  // 4 * 2 * 8
  CHECK(channels(FusionMode::Both, 1, false) == 100);            // 4 * (16 + 9)
  CHECK(channels(FusionMode::Local, 1, false) == 36);            // 4 * 9
  CHECK(channels(FusionMode::Global, 1, false) == 64);           // 4 * 16
  CHECK(channels(FusionMode::Both, 1, true) == 73);              // 4 * 16 + 9
}

TEST_CASE("fuse provenance spans tile the channel range in order") {
  Tape<double> tape;
  Rng rng(9);
  FusionModule<double> fusion(tape, "fusion", 4, 3, FusionMode::Both, 1, 0, false, rng);
  auto p0 = pyramid_from(nullptr, rng, Shape{1, 4, 4, 4});
  auto p1 = pyramid_from(nullptr, rng, Shape{1, 4, 4, 4});
  const FusedFeature<double> fused = fusion.fuse(p0, p1);
  int expected_begin = 0;
  for (const ProvenanceSpan& span : fused.provenance) {
    CHECK(span.begin == expected_begin);
    expected_begin = span.end;
  }
  CHECK(expected_begin == fused.values.shape().c);
}

TEST_CASE("fuse rejects mismatched pyramids") {
  Tape<double> tape;
  Rng rng(10);
  FusionModule<double> fusion(tape, "fusion", 4, 3, FusionMode::Both, 1, 0, false, rng);
  auto p0 = pyramid_from(nullptr, rng, Shape{1, 4, 4, 4});
  auto p1 = pyramid_from(nullptr, rng, Shape{1, 4, 5, 4});
  CHECK_THROWS_AS(fusion.fuse(p0, p1), std::invalid_argument);
}

TEST_CASE("gradients of fuse pass finite differences w.r.t. both pyramids") {
  Tape<double> tape;
  Rng rng(11);
  FusionModule<double> fusion(tape, "fusion", 3, 2, FusionMode::Both, 1, 0, false, rng);
  auto p0 = pyramid_from(&tape, rng, Shape{1, 3, 3, 3});
  auto p1 = pyramid_from(&tape, rng, Shape{1, 3, 3, 3});
  auto r = random_tensor<double>(rng, Shape{1, fusion.fused_channels(3, 3), 3, 3});
  std::vector<Tensor<double>> probes;
  for (int i = 0; i < 4; ++i) {
    probes.push_back(p0.levels[i]);
    probes.push_back(p1.levels[i]);
  }
  const double err = fd_max_rel_err(
      tape, [&]() { return sum(mul(fusion.fuse(p0, p1).values, r)); }, probes);
  CHECK(err < 1e-3);
}
