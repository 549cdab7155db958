#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "scd/config.hpp"

namespace scd {

struct ModuleCost {
  std::int64_t params = 0;
  std::int64_t flops = 0;  // 2 x multiply-accumulates at the given resolution
};

struct ModelReport {
  std::map<std::string, ModuleCost> modules;
  std::int64_t total_params = 0;
  std::int64_t total_flops = 0;
  int height = 0, width = 0;
  int iterations = 0;
};

// Closed-form accounting over the declared convolutions and correlation
// volumes. Modules: encoder, fusion, decoder_init (gating projection + h0),
// decoder (per-iteration recurrence, scales exactly with the iteration
// count), upsampler (also per-iteration).
ModelReport build_report(const RunConfig& config, int height, int width);

// Restricted variant: modules outside `only` report zero cost.
ModelReport build_report(const RunConfig& config, int height, int width,
                         const std::set<std::string>& only);

std::string report_to_json(const ModelReport& r);
std::string report_to_text(const ModelReport& r);

}  // namespace scd
