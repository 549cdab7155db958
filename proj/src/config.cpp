#include "scd/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scd/correlation.hpp"
#include "scd/decoder.hpp"

namespace scd {

namespace {

using nlohmann::json;

// clang-format off
#define SCD_CONFIG_FIELDS(X)          \
  X(feature_channels)                 \
  X(encoder_depth)                    \
  X(encoder_frozen)                   \
  X(reduced_channels)                 \
  X(corr_radius)                      \
  X(corr_patch_radius)                \
  X(corr_top_level_only)              \
  X(fusion_mode)                      \
  X(gru_variant)                      \
  X(iterations)                       \
  X(h0_mode)                          \
  X(gating_channels)                  \
  X(hidden_channels)                  \
  X(gamma)                            \
  X(learning_rate)                    \
  X(steps)                            \
  X(batch_size)                       \
  X(seed)                             \
  X(image_size)                       \
  X(scene_min_shapes)                 \
  X(scene_max_shapes)                 \
  X(scene_min_size)                   \
  X(scene_max_size)                   \
  X(change_probability)               \
  X(photometric_jitter)               \
  X(alignment_jitter)                 \
  X(eval_pairs)                       \
  X(out_dir)
// clang-format on

}  // namespace

void RunConfig::validate() const {
  const auto bad = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (feature_channels < 1) bad("feature_channels must be >= 1");
  if (encoder_depth < 4) bad("encoder_depth must be >= 4");
  if (reduced_channels < 1) bad("reduced_channels must be >= 1");
  if (corr_radius < 0) bad("corr_radius must be >= 0");
  if (corr_patch_radius < 0) bad("corr_patch_radius must be >= 0");
  fusion_mode_from_string(fusion_mode);
  gru_variant_from_string(gru_variant);
  if (iterations < 1) bad("iterations must be >= 1");
  if (gru_variant == "none" && iterations != 1)
    bad("gru_variant 'none' requires iterations = 1");
  if (h0_mode != "feature" && h0_mode != "zero") bad("h0_mode must be 'feature' or 'zero'");
  if (gating_channels < 1) bad("gating_channels must be >= 1");
  if (hidden_channels < 1) bad("hidden_channels must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) bad("gamma must be in (0, 1]");
  if (learning_rate < 0.0) bad("learning_rate must be >= 0");
  if (steps < 0) bad("steps must be >= 0");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (image_size < 16 || image_size % 16 != 0) bad("image_size must be a positive multiple of 16");
  if (scene_min_shapes < 1) bad("scene_min_shapes must be >= 1");
  if (scene_max_shapes < scene_min_shapes) bad("scene_max_shapes must be >= scene_min_shapes");
  if (scene_min_size <= 0 || scene_max_size < scene_min_size) bad("bad scene size range");
  if (change_probability < 0.0 || change_probability > 1.0)
    bad("change_probability must be in [0, 1]");
  if (photometric_jitter < 0.0) bad("photometric_jitter must be >= 0");
  if (alignment_jitter < 0.0 || alignment_jitter >= image_size)
    bad("alignment_jitter must be in [0, image_size)");
  if (eval_pairs < 1) bad("eval_pairs must be >= 1");
  if (out_dir.empty()) bad("out_dir must not be empty");
}

std::string to_json(const RunConfig& c) {
  json j;
#define X(field) j[#field] = c.field;
  SCD_CONFIG_FIELDS(X)
#undef X
  return j.dump(2);
}

RunConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  static const std::set<std::string> known = {
#define X(field) #field,
      SCD_CONFIG_FIELDS(X)
#undef X
  };
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw std::invalid_argument("config: unknown key '" + key + "'");

  RunConfig c;
  try {
#define X(field) \
  if (j.contains(#field)) j.at(#field).get_to(c.field);
    SCD_CONFIG_FIELDS(X)
#undef X
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: bad field type: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return config_from_json(text);
}

void save_config(const std::string& path, const RunConfig& c) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config file: " + path);
  out << to_json(c) << "\n";
}

}  // namespace scd
