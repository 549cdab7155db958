#pragma once

#include <cstdint>
#include <string>

namespace scd {

// Every knob the CLI exposes, with its default. Serializes to JSON and back
// losslessly; parsing rejects unknown keys.
struct RunConfig {
  // model
  int feature_channels = 32;      // encoder output width per level
  int encoder_depth = 4;          // residual blocks feeding the tap rule
  bool encoder_frozen = false;    // exclude encoder params from the optimizer
  int reduced_channels = 8;       // per-image channels after 1x1 reduction
  int corr_radius = 3;
  int corr_patch_radius = 0;
  bool corr_top_level_only = false;
  std::string fusion_mode = "both";       // feature-maps-only | local | global | both
  std::string gru_variant = "three-gate"; // none | basic | three-gate
  int iterations = 5;
  std::string h0_mode = "feature";  // feature | zero
  int gating_channels = 512;
  int hidden_channels = 512;
  double gamma = 0.8;

  // optimizer
  double learning_rate = 1e-3;
  int steps = 2000;
  int batch_size = 1;
  std::uint64_t seed = 1;

  // data
  int image_size = 64;
  int scene_min_shapes = 3;
  int scene_max_shapes = 6;
  double scene_min_size = 6;
  double scene_max_size = 20;
  double change_probability = 1.0;
  double photometric_jitter = 0.05;
  double alignment_jitter = 3.0;
  int eval_pairs = 64;

  std::string out_dir = "runs/out";

  void validate() const;  // throws std::invalid_argument on bad values
};

std::string to_json(const RunConfig& c);
RunConfig config_from_json(const std::string& text);
RunConfig load_config(const std::string& path);
void save_config(const std::string& path, const RunConfig& c);

}  // namespace scd
