#include <doctest.h>

#include "scd/model.hpp"
#include "scd/report.hpp"

using namespace scd;

namespace {

RunConfig tiny_config() {
  RunConfig c;
  c.image_size = 32;
  c.feature_channels = 6;
  c.reduced_channels = 3;
  c.corr_radius = 1;
  c.gating_channels = 8;
  c.hidden_channels = 8;
  c.iterations = 2;
  return c;
}

}  // namespace

TEST_CASE("reported decoder FLOPs scale exactly linearly with the iteration count") {
  RunConfig c;
  c.iterations = 3;
  const ModelReport r3 = build_report(c, 64, 64);
  c.iterations = 5;
  const ModelReport r5 = build_report(c, 64, 64);
  CHECK(r5.modules.at("decoder").flops * 3 == r3.modules.at("decoder").flops * 5);
  CHECK(r5.modules.at("upsampler").flops * 3 == r3.modules.at("upsampler").flops * 5);
  CHECK(r5.modules.at("decoder").params == r3.modules.at("decoder").params);
  // ratio off by less than 1% from 5/3 is implied by exact linearity
  const double ratio = static_cast<double>(r5.modules.at("decoder").flops) /
                       static_cast<double>(r3.modules.at("decoder").flops);
  CHECK(std::abs(ratio - 5.0 / 3.0) < 0.01 * (5.0 / 3.0));
}

TEST_CASE("an encoder-only report carries zero decoder parameters") {
  const ModelReport r = build_report(RunConfig{}, 64, 64, {"encoder"});
  CHECK(r.modules.at("decoder").params == 0);
  CHECK(r.modules.at("decoder").flops == 0);
  CHECK(r.modules.at("upsampler").params == 0);
  CHECK(r.modules.at("encoder").params > 0);
}

TEST_CASE("closed-form totals match the live parameter registry") {
  for (const char* variant : {"three-gate", "basic", "none"}) {
    for (const char* mode : {"both", "feature-maps-only", "local", "global"}) {
      RunConfig c = tiny_config();
      c.gru_variant = variant;
      if (c.gru_variant == "none") c.iterations = 1;
      c.fusion_mode = mode;
      Tape<float> tape;
      Rng rng(1);
      ChangeModel<float> model(tape, c, rng);
      std::int64_t registry = 0;
      for (const auto& p : tape.parameters()) registry += p.tensor.numel();
      const ModelReport r = build_report(c, c.image_size, c.image_size);
      CAPTURE(variant);
      CAPTURE(mode);
      CHECK(r.total_params == registry);
    }
  }
}

TEST_CASE("per-module parameter counts match the registry name prefixes") {
  const RunConfig c = tiny_config();
  Tape<float> tape;
  Rng rng(2);
  ChangeModel<float> model(tape, c, rng);
  const ModelReport r = build_report(c, c.image_size, c.image_size);
  std::map<std::string, std::int64_t> by_prefix;
  for (const auto& p : tape.parameters()) {
    const std::string prefix = p.name.substr(0, p.name.find('.'));
    by_prefix[prefix] += p.tensor.numel();
  }
  CHECK(r.modules.at("encoder").params == by_prefix["encoder"]);
  CHECK(r.modules.at("fusion").params == by_prefix["fusion"]);
  CHECK(r.modules.at("decoder_init").params == by_prefix["decoder_init"]);
  CHECK(r.modules.at("decoder").params == by_prefix["decoder"]);
  CHECK(r.modules.at("upsampler").params == by_prefix["upsampler"]);
}

TEST_CASE("reports reject resolutions that are not multiples of 16") {
  CHECK_THROWS_AS(build_report(RunConfig{}, 60, 64), std::invalid_argument);
}
