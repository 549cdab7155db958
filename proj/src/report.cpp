#include "scd/report.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scd/correlation.hpp"
#include "scd/decoder.hpp"

namespace scd {

namespace {

struct ConvCost {
  std::int64_t params;
  std::int64_t macs;
};

ConvCost conv_cost(int in_ch, int out_ch, int k, int out_h, int out_w) {
  const std::int64_t weights = static_cast<std::int64_t>(out_ch) * in_ch * k * k;
  return {weights + out_ch, weights * out_h * out_w};
}

}  // namespace

ModelReport build_report(const RunConfig& config, int height, int width) {
  return build_report(config, height, width,
                      {"encoder", "fusion", "decoder_init", "decoder", "upsampler"});
}

ModelReport build_report(const RunConfig& config, int height, int width,
                         const std::set<std::string>& only) {
  config.validate();
  if (height % 16 != 0 || width % 16 != 0)
    throw std::invalid_argument("report: resolution must be a multiple of 16");

  const int cf = config.feature_channels;
  const int gh = height / 16, gw = width / 16;
  const std::int64_t grid = static_cast<std::int64_t>(gh) * gw;
  const FusionMode mode = fusion_mode_from_string(config.fusion_mode);
  const GruVariant variant = gru_variant_from_string(config.gru_variant);

  ModelReport report;
  report.height = height;
  report.width = width;
  report.iterations = config.iterations;
  for (const char* m : {"encoder", "fusion", "decoder_init", "decoder", "upsampler"})
    report.modules[m] = ModuleCost{};

  const auto add = [&](const std::string& module, ConvCost cost, int applications) {
    if (!only.count(module)) return;
    ModuleCost& mc = report.modules[module];
    mc.params += cost.params;
    mc.flops += 2 * cost.macs * applications;
  };

  // encoder: strided stem + residual blocks, run on both images
  add("encoder", conv_cost(3, cf, 3, height / 2, width / 2), 2);
  add("encoder", conv_cost(cf, cf, 3, height / 4, width / 4), 2);
  add("encoder", conv_cost(cf, cf, 3, height / 8, width / 8), 2);
  add("encoder", conv_cost(cf, cf, 3, gh, gw), 2);
  for (int i = 0; i < config.encoder_depth; ++i) {
    add("encoder", conv_cost(cf, cf, 3, gh, gw), 2);
    add("encoder", conv_cost(cf, cf, 3, gh, gw), 2);
  }

  // fusion: per-level 1x1 reductions (both images) plus correlation dot
  // products
  const bool features = mode == FusionMode::FeatureMapsOnly || mode == FusionMode::Both;
  const bool corr = mode != FusionMode::FeatureMapsOnly;
  // the 1x1 reductions exist in every mode; correlation-only modes just never
  // apply them
  for (int i = 0; i < 4; ++i)
    add("fusion", conv_cost(cf, config.reduced_channels, 1, gh, gw), features ? 2 : 0);
  if (corr && only.count("fusion")) {
    const int levels = config.corr_top_level_only ? 1 : 4;
    const int side = 2 * config.corr_radius + 1;
    const int pside = 2 * config.corr_patch_radius + 1;
    const std::int64_t macs_per_level =
        mode == FusionMode::Global
            ? grid * grid * cf
            : grid * side * side * pside * pside * cf;
    report.modules["fusion"].flops += 2 * levels * macs_per_level;
  }

  const int grid_h = gh, grid_w = gw;
  FusionMode fm = mode;
  const int side = 2 * config.corr_radius + 1;
  const int corr_ch = fm == FusionMode::Global ? grid_h * grid_w
                      : fm == FusionMode::FeatureMapsOnly ? 0
                                                          : side * side;
  const int corr_levels = fm == FusionMode::FeatureMapsOnly ? 0
                          : config.corr_top_level_only ? 1 : 4;
  const int fused_ch =
      (features ? 4 * 2 * config.reduced_channels : 0) + corr_levels * corr_ch;

  // decoder_init: gating projection (three-gate) and data-dependent h0
  if (variant == GruVariant::ThreeGate)
    add("decoder_init", conv_cost(4 * cf, config.gating_channels, 3, gh, gw), 1);
  if (variant != GruVariant::None && config.h0_mode == "feature")
    add("decoder_init", conv_cost(fused_ch, config.hidden_channels, 3, gh, gw), 1);

  // decoder recurrence: cost per iteration times the iteration count
  const int ch = config.hidden_channels, cg = config.gating_channels;
  if (variant == GruVariant::None) {
    add("decoder", conv_cost(fused_ch, ch, 3, gh, gw), config.iterations);
  } else {
    const int gates = variant == GruVariant::ThreeGate ? 4 : 3;  // r, z, (p), candidate
    for (int g = 0; g < gates; ++g) {
      add("decoder", conv_cost(fused_ch, ch, 3, gh, gw), config.iterations);
      add("decoder", conv_cost(ch, ch, 3, gh, gw), config.iterations);
      if (variant == GruVariant::ThreeGate)
        add("decoder", conv_cost(cg, ch, 1, gh, gw), config.iterations);
    }
  }

  // upsampler: applied to every iteration's hidden state
  const int schedule[4] = {256, 128, 64, 2};
  int in_ch = ch, res_h = gh, res_w = gw;
  for (int i = 0; i < 4; ++i) {
    add("upsampler", conv_cost(in_ch, schedule[i], 3, res_h, res_w), config.iterations);
    in_ch = schedule[i];
    res_h *= 2;
    res_w *= 2;
  }

  for (const auto& [name, cost] : report.modules) {
    report.total_params += cost.params;
    report.total_flops += cost.flops;
  }
  return report;
}

std::string report_to_json(const ModelReport& r) {
  nlohmann::json mods;
  for (const auto& [name, cost] : r.modules)
    mods[name] = {{"params", cost.params}, {"flops", cost.flops}};
  nlohmann::json j{{"modules", mods},
                   {"total_params", r.total_params},
                   {"total_flops", r.total_flops},
                   {"height", r.height},
                   {"width", r.width},
                   {"iterations", r.iterations}};
  return j.dump(2);
}

std::string report_to_text(const ModelReport& r) {
  std::ostringstream out;
  char line[128];
  out << "resolution " << r.height << "x" << r.width << ", iterations " << r.iterations << "\n";
  std::snprintf(line, sizeof(line), "%-14s %14s %16s\n", "module", "params", "FLOPs");
  out << line;
  for (const auto& [name, cost] : r.modules) {
    std::snprintf(line, sizeof(line), "%-14s %14lld %16lld\n", name.c_str(),
                  static_cast<long long>(cost.params), static_cast<long long>(cost.flops));
    out << line;
  }
  std::snprintf(line, sizeof(line), "%-14s %14lld %16lld\n", "total",
                static_cast<long long>(r.total_params), static_cast<long long>(r.total_flops));
  out << line;
  return out.str();
}

}  // namespace scd
