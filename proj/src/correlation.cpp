#include "scd/correlation.hpp"

#include <stdexcept>

namespace scd {

FusionMode fusion_mode_from_string(const std::string& s) {
  if (s == "feature-maps-only") return FusionMode::FeatureMapsOnly;
  if (s == "local") return FusionMode::Local;
  if (s == "global") return FusionMode::Global;
  if (s == "both") return FusionMode::Both;
  throw std::invalid_argument("unknown fusion mode: " + s);
}

std::string to_string(FusionMode m) {
  switch (m) {
    case FusionMode::FeatureMapsOnly: return "feature-maps-only";
    case FusionMode::Local: return "local";
    case FusionMode::Global: return "global";
    case FusionMode::Both: return "both";
  }
  return "?";
}

namespace {

template <typename T>
using Data = std::shared_ptr<TensorData<T>>;

template <typename T>
void check_pair(const Tensor<T>& m0, const Tensor<T>& m1, const char* name) {
  if (m0.shape() != m1.shape())
    throw std::invalid_argument(std::string(name) + ": feature maps differ in shape, " +
                                m0.shape().str() + " vs " + m1.shape().str());
}

}  // namespace

template <typename T>
Tensor<T> local_correlation(const Tensor<T>& m0, const Tensor<T>& m1, int radius,
                            int patch_radius) {
  using OB = detail::OpBuilder<T>;
  check_pair(m0, m1, "local_correlation");
  if (radius < 0) throw std::invalid_argument("local_correlation: radius must be >= 0");
  if (patch_radius < 0) throw std::invalid_argument("local_correlation: patch_radius must be >= 0");
  const Shape s = m0.shape();
  const int side = 2 * radius + 1;
  const int pside = 2 * patch_radius + 1;
  const T norm = T(1) / (static_cast<T>(s.c) * pside * pside);

  Tape<T>* tape = OB::tape_for({&m0, &m1});
  Tensor<T> out = OB::output(tape, Shape{s.n, side * side, s.h, s.w});

  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const std::size_t in_stride = static_cast<std::size_t>(s.c) * plane;
  const std::size_t out_stride = static_cast<std::size_t>(side) * side * plane;

  const auto feat = [&](const T* base, int c, int y, int x) -> T {
    if (y < 0 || y >= s.h || x < 0 || x >= s.w) return T(0);
    return base[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * s.w + x];
  };

  for (int n = 0; n < s.n; ++n) {
    const T* a = m0.value().data() + n * in_stride;
    const T* b = m1.value().data() + n * in_stride;
    T* o = out.value().data() + n * out_stride;
    for (int dy = -radius; dy <= radius; ++dy) {
      for (int dx = -radius; dx <= radius; ++dx) {
        T* ochan = o + (static_cast<std::size_t>(dy + radius) * side + (dx + radius)) * plane;
        for (int y = 0; y < s.h; ++y) {
          for (int x = 0; x < s.w; ++x) {
            T acc = T(0);
            for (int oy = -patch_radius; oy <= patch_radius; ++oy)
              for (int ox = -patch_radius; ox <= patch_radius; ++ox)
                for (int c = 0; c < s.c; ++c)
                  acc += feat(a, c, y + oy, x + ox) * feat(b, c, y + dy + oy, x + dx + ox);
            ochan[static_cast<std::size_t>(y) * s.w + x] = acc * norm;
          }
        }
      }
    }
  }

  if (tape) {
    Data<T> ad = OB::data(m0), bd = OB::data(m1), od = OB::data(out);
    OB::record(tape, [ad, bd, od, s, radius, patch_radius, side, norm, plane, in_stride,
                      out_stride]() {
      if (od->grad.empty()) return;
      const bool ga = ad->requires_grad, gb = bd->requires_grad;
      if (!ga && !gb) return;
      if (ga) ad->ensure_grad();
      if (gb) bd->ensure_grad();
      const auto idx = [&](int c, int y, int x) {
        return static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * s.w + x;
      };
      const auto inside = [&](int y, int x) { return y >= 0 && y < s.h && x >= 0 && x < s.w; };
      for (int n = 0; n < s.n; ++n) {
        const T* a = ad->value.data() + n * in_stride;
        const T* b = bd->value.data() + n * in_stride;
        T* da = ga ? ad->grad.data() + n * in_stride : nullptr;
        T* db = gb ? bd->grad.data() + n * in_stride : nullptr;
        const T* dout = od->grad.data() + n * out_stride;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const T* dchan =
                dout + (static_cast<std::size_t>(dy + radius) * side + (dx + radius)) * plane;
            for (int y = 0; y < s.h; ++y) {
              for (int x = 0; x < s.w; ++x) {
                const T g = dchan[static_cast<std::size_t>(y) * s.w + x] * norm;
                if (g == T(0)) continue;
                for (int oy = -patch_radius; oy <= patch_radius; ++oy) {
                  for (int ox = -patch_radius; ox <= patch_radius; ++ox) {
                    const int ay = y + oy, ax = x + ox;
                    const int by = y + dy + oy, bx = x + dx + ox;
                    const bool a_in = inside(ay, ax), b_in = inside(by, bx);
                    if (!a_in || !b_in) continue;
                    for (int c = 0; c < s.c; ++c) {
                      if (ga) da[idx(c, ay, ax)] += g * b[idx(c, by, bx)];
                      if (gb) db[idx(c, by, bx)] += g * a[idx(c, ay, ax)];
                    }
                  }
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> global_correlation(const Tensor<T>& m0, const Tensor<T>& m1) {
  using OB = detail::OpBuilder<T>;
  check_pair(m0, m1, "global_correlation");
  const Shape s = m0.shape();
  const int npix = s.h * s.w;
  const T norm = T(1) / static_cast<T>(s.c);

  Tape<T>* tape = OB::tape_for({&m0, &m1});
  Tensor<T> out = OB::output(tape, Shape{s.n, npix, s.h, s.w});

  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const std::size_t in_stride = static_cast<std::size_t>(s.c) * plane;
  const std::size_t out_stride = static_cast<std::size_t>(npix) * plane;

  for (int n = 0; n < s.n; ++n) {
    const T* a = m0.value().data() + n * in_stride;
    const T* b = m1.value().data() + n * in_stride;
    T* o = out.value().data() + n * out_stride;
    for (int k = 0; k < npix; ++k) {
      for (std::size_t p = 0; p < plane; ++p) {
        T acc = T(0);
        for (int c = 0; c < s.c; ++c) acc += a[c * plane + p] * b[c * plane + k];
        o[static_cast<std::size_t>(k) * plane + p] = acc * norm;
      }
    }
  }

  if (tape) {
    Data<T> ad = OB::data(m0), bd = OB::data(m1), od = OB::data(out);
    OB::record(tape, [ad, bd, od, s, npix, norm, plane, in_stride, out_stride]() {
      if (od->grad.empty()) return;
      const bool ga = ad->requires_grad, gb = bd->requires_grad;
      if (!ga && !gb) return;
      if (ga) ad->ensure_grad();
      if (gb) bd->ensure_grad();
      for (int n = 0; n < s.n; ++n) {
        const T* a = ad->value.data() + n * in_stride;
        const T* b = bd->value.data() + n * in_stride;
        T* da = ga ? ad->grad.data() + n * in_stride : nullptr;
        T* db = gb ? bd->grad.data() + n * in_stride : nullptr;
        const T* dout = od->grad.data() + n * out_stride;
        for (int k = 0; k < npix; ++k) {
          for (std::size_t p = 0; p < plane; ++p) {
            const T g = dout[static_cast<std::size_t>(k) * plane + p] * norm;
            if (g == T(0)) continue;
            for (int c = 0; c < s.c; ++c) {
              if (ga) da[c * plane + p] += g * b[c * plane + k];
              if (gb) db[c * plane + k] += g * a[c * plane + p];
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
FusionModule<T>::FusionModule(Tape<T>& tape, const std::string& name, int feature_channels,
                              int reduced_channels, FusionMode mode, int radius, int patch_radius,
                              bool top_level_only, Rng& rng)
    : mode_(mode),
      reduced_channels_(reduced_channels),
      radius_(radius),
      patch_radius_(patch_radius),
      top_level_only_(top_level_only) {
  if (reduced_channels < 1) throw std::invalid_argument("reduced_channels must be >= 1");
  for (int i = 0; i < 4; ++i)
    reduce_[i] = Conv2d<T>(tape, name + ".reduce" + std::to_string(i), feature_channels,
                           reduced_channels, 1, 1, 0, rng);
}

template <typename T>
int FusionModule<T>::fused_channels(int grid_h, int grid_w) const {
  const int side = 2 * radius_ + 1;
  const int corr_ch = mode_ == FusionMode::Global ? grid_h * grid_w
                      : mode_ == FusionMode::FeatureMapsOnly ? 0
                                                             : side * side;
  const bool features = mode_ == FusionMode::FeatureMapsOnly || mode_ == FusionMode::Both;
  const int corr_levels = mode_ == FusionMode::FeatureMapsOnly ? 0 : (top_level_only_ ? 1 : 4);
  return (features ? 4 * 2 * reduced_channels_ : 0) + corr_levels * corr_ch;
}

template <typename T>
FusedFeature<T> FusionModule<T>::fuse(const FeaturePyramid<T>& p0,
                                      const FeaturePyramid<T>& p1) const {
  for (int i = 0; i < 4; ++i) check_pair(p0.levels[i], p1.levels[i], "fuse");

  const bool features = mode_ == FusionMode::FeatureMapsOnly || mode_ == FusionMode::Both;
  const bool corr = mode_ != FusionMode::FeatureMapsOnly;

  std::vector<Tensor<T>> blocks;
  std::vector<ProvenanceSpan> provenance;
  int ch = 0;
  const auto push = [&](Tensor<T> t, ProvenanceSpan::Kind kind, int level) {
    const int c = t.shape().c;
    provenance.push_back(ProvenanceSpan{kind, level, ch, ch + c});
    ch += c;
    blocks.push_back(std::move(t));
  };

  for (int i = 0; i < 4; ++i) {
    if (features) {
      push(reduce_[i](p0.levels[i]), ProvenanceSpan::Kind::ReducedT0, i);
      push(reduce_[i](p1.levels[i]), ProvenanceSpan::Kind::ReducedT1, i);
    }
    if (corr && !top_level_only_) {
      Tensor<T> c = mode_ == FusionMode::Global
                        ? global_correlation(p0.levels[i], p1.levels[i])
                        : local_correlation(p0.levels[i], p1.levels[i], radius_, patch_radius_);
      push(std::move(c), ProvenanceSpan::Kind::Correlation, i);
    }
  }
  if (corr && top_level_only_) {
    Tensor<T> c = mode_ == FusionMode::Global
                      ? global_correlation(p0.levels[3], p1.levels[3])
                      : local_correlation(p0.levels[3], p1.levels[3], radius_, patch_radius_);
    push(std::move(c), ProvenanceSpan::Kind::Correlation, 3);
  }

  FusedFeature<T> fused;
  fused.values = concat_channels(blocks);
  fused.provenance = std::move(provenance);
  return fused;
}

#define SCD_INSTANTIATE(T)                                                                \
  template Tensor<T> local_correlation<T>(const Tensor<T>&, const Tensor<T>&, int, int); \
  template Tensor<T> global_correlation<T>(const Tensor<T>&, const Tensor<T>&);          \
  template class FusionModule<T>;

SCD_INSTANTIATE(float)
SCD_INSTANTIATE(double)

#undef SCD_INSTANTIATE

}  // namespace scd
