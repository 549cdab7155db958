#pragma once

#include <array>
#include <string>
#include <vector>

#include "scd/encoder.hpp"
#include "scd/layers.hpp"
#include "scd/tensor.hpp"

namespace scd {

enum class FusionMode { FeatureMapsOnly, Local, Global, Both };

FusionMode fusion_mode_from_string(const std::string& s);
std::string to_string(FusionMode m);

// Displacement-indexed similarity volume: channel (dy+r)*(2r+1)+(dx+r) holds
// the patch-summed dot product between m0 at x and m1 at x+d, normalized by
// feature_dim * (2*patch_radius+1)^2. Reads outside the grid contribute zero.
template <typename T>
Tensor<T> local_correlation(const Tensor<T>& m0, const Tensor<T>& m1, int radius,
                            int patch_radius);

// Channel k holds <m0(x), m1(p_k)> / feature_dim for every pixel p_k in
// raster order.
template <typename T>
Tensor<T> global_correlation(const Tensor<T>& m0, const Tensor<T>& m1);

struct ProvenanceSpan {
  enum class Kind { ReducedT0, ReducedT1, Correlation };
  Kind kind;
  int level;
  int begin;  // channel range [begin, end)
  int end;
};

template <typename T>
struct FusedFeature {
  Tensor<T> values;
  std::vector<ProvenanceSpan> provenance;
};

// Per pyramid level: channel-reduce both feature maps with a shared 1x1
// convolution, compute the level's correlation volume, and concatenate the
// blocks the active mode asks for; level blocks are then concatenated
// channel-wise.
template <typename T>
class FusionModule {
 public:
  FusionModule(Tape<T>& tape, const std::string& name, int feature_channels, int reduced_channels,
               FusionMode mode, int radius, int patch_radius, bool top_level_only, Rng& rng);

  FusedFeature<T> fuse(const FeaturePyramid<T>& p0, const FeaturePyramid<T>& p1) const;

  // closed-form output channel count for a given feature grid
  int fused_channels(int grid_h, int grid_w) const;

  FusionMode mode() const { return mode_; }
  int radius() const { return radius_; }
  int patch_radius() const { return patch_radius_; }
  int reduced_channels() const { return reduced_channels_; }
  bool top_level_only() const { return top_level_only_; }

 private:
  std::array<Conv2d<T>, 4> reduce_;
  FusionMode mode_;
  int reduced_channels_;
  int radius_;
  int patch_radius_;
  bool top_level_only_;
};

}  // namespace scd
