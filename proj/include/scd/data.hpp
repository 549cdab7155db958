#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scd/mask.hpp"
#include "scd/rng.hpp"
#include "scd/tensor.hpp"

namespace scd {

struct SceneShape {
  int id = 0;  // object identity; 0 is reserved for the background
  enum class Kind { Rect, Circle } kind = Kind::Rect;
  double cx = 0, cy = 0;  // center in pixel coordinates
  double rx = 0, ry = 0;  // half extents; circles use rx as radius
  std::array<double, 3> color{0, 0, 0};
};

struct SceneSpec {
  int min_shapes = 3;
  int max_shapes = 6;
  double min_size = 6;   // full extent in pixels
  double max_size = 20;
  double change_probability = 1.0;
  double photometric_jitter = 0.05;  // brightness/contrast amplitude on t1
  // random warp of t0 up to this magnitude (px); the ground truth stays on
  // the t1 grid
  double alignment_jitter = 0.0;
};

// A rendered pair plus its ground truth, which marks pixels whose topmost
// object differs between the two scenes (defined on the t1 pixel grid).
template <typename T>
struct ChangePair {
  Tensor<T> img0, img1;
  LabelMap gt;
  std::uint64_t seed = 0;
};

std::vector<SceneShape> sample_scene(Rng& rng, int h, int w, const SceneSpec& spec);

// id of the topmost shape covering each pixel center, 0 where none does
std::vector<int> object_map(const std::vector<SceneShape>& shapes, int h, int w);

LabelMap change_mask(const std::vector<SceneShape>& scene0, const std::vector<SceneShape>& scene1,
                     int h, int w);

// Shapes painted in list order over a smooth textured background drawn from
// bg_rng; two calls with equal arguments render identical images.
template <typename T>
Tensor<T> render_scene(const std::vector<SceneShape>& shapes, int h, int w, Rng bg_rng);

template <typename T>
ChangePair<T> generate_pair(std::uint64_t seed, int h, int w, const SceneSpec& spec);

// ---- geometric perturbations ----------------------------------------------

struct Perturbation {
  enum class Kind { Translation, Homography } kind = Kind::Translation;
  double magnitude = 0;  // corner/offset displacement in pixels
};

Perturbation::Kind perturbation_kind_from_string(const std::string& s);
std::string to_string(Perturbation::Kind k);

// output(x, y) = input(x - dx, y - dy), bilinear, zeros outside the frame
template <typename T>
Tensor<T> translate_image(const Tensor<T>& img, double dx, double dy);

// h maps output pixel coordinates to source sampling coordinates
template <typename T>
Tensor<T> warp_homography(const Tensor<T>& img, const std::array<double, 9>& h);

// Samples a direction (translation) or four corner offsets (homography) of
// the given magnitude from rng and warps. Magnitude 0 returns the input
// unchanged, bit for bit.
template <typename T>
Tensor<T> warp(const Tensor<T>& img, const Perturbation& p, Rng& rng);

// Projective transform mapping the four src points onto the four dst points.
std::array<double, 9> solve_homography(const std::array<std::array<double, 2>, 4>& src,
                                       const std::array<std::array<double, 2>, 4>& dst);

// ---- dataset directory -----------------------------------------------------

// Layout: <dir>/pairs/<id>_t0.png, <id>_t1.png, <id>_gt.png plus
// <dir>/manifest.json listing ids and seeds.
struct PairsManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
};

struct PairsManifest {
  int height = 0, width = 0;
  std::vector<PairsManifestEntry> pairs;
};

void write_pairs_dir(const std::string& dir, const std::vector<ChangePair<float>>& pairs);
PairsManifest read_pairs_manifest(const std::string& dir);

}  // namespace scd
