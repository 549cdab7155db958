#include "scd/data.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scd/png_io.hpp"

namespace scd {

namespace {

bool covers(const SceneShape& s, int x, int y) {
  const double px = x + 0.5, py = y + 0.5;
  if (s.kind == SceneShape::Kind::Rect)
    return px >= s.cx - s.rx && px < s.cx + s.rx && py >= s.cy - s.ry && py < s.cy + s.ry;
  const double dx = px - s.cx, dy = py - s.cy;
  return dx * dx + dy * dy <= s.rx * s.rx;
}

void validate_spec(const SceneSpec& spec) {
  if (spec.max_shapes < 1 || spec.min_shapes < 1)
    throw std::invalid_argument("scene spec: shape counts must be >= 1 (zero-shape scenes are degenerate)");
  if (spec.min_shapes > spec.max_shapes)
    throw std::invalid_argument("scene spec: min_shapes exceeds max_shapes");
  if (spec.min_size <= 0 || spec.max_size < spec.min_size)
    throw std::invalid_argument("scene spec: bad size range");
}

SceneShape random_shape(Rng& rng, int h, int w, const SceneSpec& spec, int id) {
  SceneShape s;
  s.id = id;
  s.kind = rng.bernoulli(0.5) ? SceneShape::Kind::Rect : SceneShape::Kind::Circle;
  s.rx = rng.uniform(spec.min_size, spec.max_size) / 2.0;
  s.ry = s.kind == SceneShape::Kind::Rect ? rng.uniform(spec.min_size, spec.max_size) / 2.0 : s.rx;
  const double mx = std::min(s.rx + 1.0, w / 2.0), my = std::min(s.ry + 1.0, h / 2.0);
  s.cx = rng.uniform(mx, w - mx);
  s.cy = rng.uniform(my, h - my);
  for (double& c : s.color) c = rng.uniform(0.05, 0.95);
  return s;
}

}  // namespace

std::vector<SceneShape> sample_scene(Rng& rng, int h, int w, const SceneSpec& spec) {
  validate_spec(spec);
  const int count = rng.uniform_int(spec.min_shapes, spec.max_shapes);
  std::vector<SceneShape> shapes;
  shapes.reserve(count);
  for (int i = 0; i < count; ++i) shapes.push_back(random_shape(rng, h, w, spec, i + 1));
  return shapes;
}

std::vector<int> object_map(const std::vector<SceneShape>& shapes, int h, int w) {
  std::vector<int> ids(static_cast<std::size_t>(h) * w, 0);
  for (const SceneShape& s : shapes) {  // later shapes paint over earlier ones
    const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - s.rx - 1)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + s.rx + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - s.ry - 1)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + s.ry + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (covers(s, x, y)) ids[static_cast<std::size_t>(y) * w + x] = s.id;
  }
  return ids;
}

LabelMap change_mask(const std::vector<SceneShape>& scene0, const std::vector<SceneShape>& scene1,
                     int h, int w) {
  const std::vector<int> m0 = object_map(scene0, h, w);
  const std::vector<int> m1 = object_map(scene1, h, w);
  LabelMap gt(h, w);
  for (std::size_t i = 0; i < gt.v.size(); ++i) gt.v[i] = m0[i] != m1[i] ? 1 : 0;
  return gt;
}

template <typename T>
Tensor<T> render_scene(const std::vector<SceneShape>& shapes, int h, int w, Rng bg_rng) {
  // background: bilinear ramp over a coarse random color grid plus pixel noise
  constexpr int kGrid = 5;
  double grid[kGrid][kGrid][3];
  for (int gy = 0; gy < kGrid; ++gy)
    for (int gx = 0; gx < kGrid; ++gx)
      for (int c = 0; c < 3; ++c) grid[gy][gx][c] = bg_rng.uniform(0.2, 0.8);

  Tensor<T> img(Shape{1, 3, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  T* v = img.value().data();
  for (int y = 0; y < h; ++y) {
    const double fy = h > 1 ? static_cast<double>(y) * (kGrid - 1) / (h - 1) : 0.0;
    const int gy = std::min(static_cast<int>(fy), kGrid - 2);
    const double wy = fy - gy;
    for (int x = 0; x < w; ++x) {
      const double fx = w > 1 ? static_cast<double>(x) * (kGrid - 1) / (w - 1) : 0.0;
      const int gx = std::min(static_cast<int>(fx), kGrid - 2);
      const double wx = fx - gx;
      const double noise = bg_rng.uniform(-0.02, 0.02);
      for (int c = 0; c < 3; ++c) {
        const double top = grid[gy][gx][c] + (grid[gy][gx + 1][c] - grid[gy][gx][c]) * wx;
        const double bot =
            grid[gy + 1][gx][c] + (grid[gy + 1][gx + 1][c] - grid[gy + 1][gx][c]) * wx;
        const double val = std::clamp(top + (bot - top) * wy + noise, 0.0, 1.0);
        v[c * plane + static_cast<std::size_t>(y) * w + x] = static_cast<T>(val);
      }
    }
  }
  for (const SceneShape& s : shapes) {
    const int x0 = std::max(0, static_cast<int>(std::floor(s.cx - s.rx - 1)));
    const int x1 = std::min(w - 1, static_cast<int>(std::ceil(s.cx + s.rx + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(s.cy - s.ry - 1)));
    const int y1 = std::min(h - 1, static_cast<int>(std::ceil(s.cy + s.ry + 1)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (covers(s, x, y))
          for (int c = 0; c < 3; ++c)
            v[c * plane + static_cast<std::size_t>(y) * w + x] = static_cast<T>(s.color[c]);
  }
  return img;
}

namespace {

std::vector<SceneShape> edit_scene(const std::vector<SceneShape>& scene, Rng& rng, int h, int w,
                                   const SceneSpec& spec, bool* edited) {
  std::vector<SceneShape> out;
  int next_id = 1;
  for (const SceneShape& s : scene) next_id = std::max(next_id, s.id + 1);
  *edited = false;
  for (const SceneShape& s : scene) {
    const double roll = rng.uniform();
    if (roll < 0.3) {  // remove
      *edited = true;
      continue;
    }
    if (roll < 0.6) {  // move
      SceneShape moved = s;
      const double mx = std::min(s.rx + 1.0, w / 2.0), my = std::min(s.ry + 1.0, h / 2.0);
      moved.cx = rng.uniform(mx, w - mx);
      moved.cy = rng.uniform(my, h - my);
      out.push_back(moved);
      *edited = true;
      continue;
    }
    out.push_back(s);
  }
  const int additions = rng.uniform_int(0, 2);
  for (int i = 0; i < additions; ++i) {
    out.push_back(random_shape(rng, h, w, spec, next_id++));
    *edited = true;
  }
  return out;
}

}  // namespace

template <typename T>
ChangePair<T> generate_pair(std::uint64_t seed, int h, int w, const SceneSpec& spec) {
  validate_spec(spec);
  if (h % 16 != 0 || w % 16 != 0)
    throw std::invalid_argument("generate_pair: height and width must be multiples of 16");

  Rng root(seed);
  Rng bg_rng = root.fork(0);
  Rng scene_rng = root.fork(1);
  Rng edit_rng = root.fork(2);
  Rng jitter_rng = root.fork(3);

  const std::vector<SceneShape> scene0 = sample_scene(scene_rng, h, w, spec);
  std::vector<SceneShape> scene1 = scene0;
  if (edit_rng.bernoulli(spec.change_probability)) {
    bool edited = false;
    for (int attempt = 0; attempt < 16 && !edited; ++attempt)
      scene1 = edit_scene(scene0, edit_rng, h, w, spec, &edited);
  }

  ChangePair<T> pair;
  pair.seed = seed;
  pair.img0 = render_scene<T>(scene0, h, w, bg_rng);
  pair.img1 = render_scene<T>(scene1, h, w, bg_rng);
  pair.gt = change_mask(scene0, scene1, h, w);

  if (spec.alignment_jitter > 0) {
    Rng warp_rng = root.fork(4);
    Perturbation p;
    p.kind = warp_rng.bernoulli(0.5) ? Perturbation::Kind::Translation
                                     : Perturbation::Kind::Homography;
    p.magnitude = warp_rng.uniform(0.0, spec.alignment_jitter);
    if (p.magnitude > 0) pair.img0 = warp(pair.img0, p, warp_rng);
  }

  if (spec.photometric_jitter > 0) {
    const double j = spec.photometric_jitter;
    const double brightness = jitter_rng.uniform(-j, j);
    const double contrast = jitter_rng.uniform(1.0 - j, 1.0 + j);
    for (T& v : pair.img1.value())
      v = static_cast<T>(std::clamp((static_cast<double>(v) - 0.5) * contrast + 0.5 + brightness,
                                    0.0, 1.0));
  }
  return pair;
}

// ---- perturbations --------------------------------------------------------

Perturbation::Kind perturbation_kind_from_string(const std::string& s) {
  if (s == "translation") return Perturbation::Kind::Translation;
  if (s == "homography") return Perturbation::Kind::Homography;
  throw std::invalid_argument("unknown perturbation kind: " + s);
}

std::string to_string(Perturbation::Kind k) {
  return k == Perturbation::Kind::Translation ? "translation" : "homography";
}

namespace {

template <typename T>
T sample_bilinear_zero(const T* plane, int h, int w, double sy, double sx) {
  const int x0 = static_cast<int>(std::floor(sx)), y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0, fy = sy - y0;
  double acc = 0;
  for (int dy = 0; dy <= 1; ++dy) {
    const int y = y0 + dy;
    if (y < 0 || y >= h) continue;
    const double wy = dy == 0 ? 1.0 - fy : fy;
    for (int dx = 0; dx <= 1; ++dx) {
      const int x = x0 + dx;
      if (x < 0 || x >= w) continue;
      const double wx = dx == 0 ? 1.0 - fx : fx;
      acc += wy * wx * static_cast<double>(plane[static_cast<std::size_t>(y) * w + x]);
    }
  }
  return static_cast<T>(acc);
}

}  // namespace

template <typename T>
Tensor<T> translate_image(const Tensor<T>& img, double dx, double dy) {
  const Shape s = img.shape();
  Tensor<T> out(s);
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = img.value().data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      T* dst = out.value().data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x)
          dst[static_cast<std::size_t>(y) * s.w + x] =
              sample_bilinear_zero(src, s.h, s.w, y - dy, x - dx);
    }
  }
  return out;
}

template <typename T>
Tensor<T> warp_homography(const Tensor<T>& img, const std::array<double, 9>& hm) {
  const Shape s = img.shape();
  Tensor<T> out(s);
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  for (int y = 0; y < s.h; ++y) {
    for (int x = 0; x < s.w; ++x) {
      const double z = hm[6] * x + hm[7] * y + hm[8];
      const double sx = (hm[0] * x + hm[1] * y + hm[2]) / z;
      const double sy = (hm[3] * x + hm[4] * y + hm[5]) / z;
      for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
          const T* src = img.value().data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
          T* dst = out.value().data() + (static_cast<std::size_t>(n) * s.c + c) * plane;
          dst[static_cast<std::size_t>(y) * s.w + x] =
              sample_bilinear_zero(src, s.h, s.w, sy, sx);
        }
      }
    }
  }
  return out;
}

std::array<double, 9> solve_homography(const std::array<std::array<double, 2>, 4>& src,
                                       const std::array<std::array<double, 2>, 4>& dst) {
  // 8x8 linear system for [h11..h32] with h33 = 1, Gaussian elimination with
  // partial pivoting
  double a[8][9] = {};
  for (int i = 0; i < 4; ++i) {
    const double x = src[i][0], y = src[i][1];
    const double u = dst[i][0], v = dst[i][1];
    double* r0 = a[2 * i];
    double* r1 = a[2 * i + 1];
    r0[0] = x; r0[1] = y; r0[2] = 1; r0[6] = -u * x; r0[7] = -u * y; r0[8] = u;
    r1[3] = x; r1[4] = y; r1[5] = 1; r1[6] = -v * x; r1[7] = -v * y; r1[8] = v;
  }
  for (int col = 0; col < 8; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 8; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) < 1e-12)
      throw std::invalid_argument("solve_homography: degenerate point configuration");
    std::swap(a[pivot], a[col]);
    for (int r = 0; r < 8; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      for (int c2 = col; c2 < 9; ++c2) a[r][c2] -= f * a[col][c2];
    }
  }
  std::array<double, 9> h;
  for (int i = 0; i < 8; ++i) h[i] = a[i][8] / a[i][i];
  h[8] = 1.0;
  return h;
}

template <typename T>
Tensor<T> warp(const Tensor<T>& img, const Perturbation& p, Rng& rng) {
  const Shape s = img.shape();
  if (p.magnitude < 0) throw std::invalid_argument("warp: magnitude must be >= 0");
  if (p.magnitude >= std::min(s.h, s.w))
    throw std::invalid_argument("warp: magnitude " + std::to_string(p.magnitude) +
                                " exceeds image bounds " + s.str());
  if (p.magnitude == 0) return Tensor<T>(s, img.value());

  constexpr double kTau = 6.283185307179586476925286766559;
  if (p.kind == Perturbation::Kind::Translation) {
    const double theta = rng.uniform(0, kTau);
    return translate_image(img, p.magnitude * std::cos(theta), p.magnitude * std::sin(theta));
  }
  const std::array<std::array<double, 2>, 4> corners = {
      {{0.0, 0.0},
       {static_cast<double>(s.w - 1), 0.0},
       {static_cast<double>(s.w - 1), static_cast<double>(s.h - 1)},
       {0.0, static_cast<double>(s.h - 1)}}};
  std::array<std::array<double, 2>, 4> displaced = corners;
  for (auto& c : displaced) {
    const double phi = rng.uniform(0, kTau);
    c[0] += p.magnitude * std::cos(phi);
    c[1] += p.magnitude * std::sin(phi);
  }
  // output -> source mapping: displaced corners land on the original ones
  return warp_homography(img, solve_homography(displaced, corners));
}

// ---- dataset directory -----------------------------------------------------

void write_pairs_dir(const std::string& dir, const std::vector<ChangePair<float>>& pairs) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "pairs");
  nlohmann::json list = nlohmann::json::array();
  int height = 0, width = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    char id[16];
    std::snprintf(id, sizeof(id), "%04zu", i);
    const ChangePair<float>& p = pairs[i];
    height = p.img0.shape().h;
    width = p.img0.shape().w;
    save_image((fs::path(dir) / "pairs" / (std::string(id) + "_t0.png")).string(), p.img0);
    save_image((fs::path(dir) / "pairs" / (std::string(id) + "_t1.png")).string(), p.img1);
    save_mask((fs::path(dir) / "pairs" / (std::string(id) + "_gt.png")).string(), p.gt);
    list.push_back({{"id", id}, {"seed", p.seed}});
  }
  nlohmann::json manifest{{"height", height}, {"width", width}, {"pairs", list}};
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  out << manifest.dump(2) << "\n";
}

PairsManifest read_pairs_manifest(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream in(fs::path(dir) / "manifest.json");
  if (!in) throw std::runtime_error("cannot open manifest.json in " + dir);
  nlohmann::json j;
  in >> j;
  PairsManifest m;
  m.height = j.at("height").get<int>();
  m.width = j.at("width").get<int>();
  for (const auto& item : j.at("pairs"))
    m.pairs.push_back(PairsManifestEntry{item.at("id").get<std::string>(),
                                         item.at("seed").get<std::uint64_t>()});
  return m;
}

#define SCD_INSTANTIATE(T)                                                             \
  template Tensor<T> render_scene<T>(const std::vector<SceneShape>&, int, int, Rng);   \
  template ChangePair<T> generate_pair<T>(std::uint64_t, int, int, const SceneSpec&);  \
  template Tensor<T> translate_image<T>(const Tensor<T>&, double, double);             \
  template Tensor<T> warp_homography<T>(const Tensor<T>&, const std::array<double, 9>&); \
  template Tensor<T> warp<T>(const Tensor<T>&, const Perturbation&, Rng&);

SCD_INSTANTIATE(float)
SCD_INSTANTIATE(double)

#undef SCD_INSTANTIATE

}  // namespace scd
