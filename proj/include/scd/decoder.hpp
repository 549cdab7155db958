#pragma once

#include <string>
#include <vector>

#include "scd/correlation.hpp"
#include "scd/encoder.hpp"
#include "scd/layers.hpp"
#include "scd/tensor.hpp"

namespace scd {

enum class GruVariant { None, Basic, ThreeGate };

GruVariant gru_variant_from_string(const std::string& s);
std::string to_string(GruVariant v);

template <typename T>
struct GruState {
  Tensor<T> h;
  int step = 0;
  Tensor<T> f;  // pyramid-derived gating map, fixed for the whole rollout
};

// Gating map f = sigmoid(P * concat_i(m0_i - m1_i)), computed once per image
// pair and reused by every decoder iteration.
template <typename T>
class RatiosForReflection {
 public:
  RatiosForReflection() = default;
  RatiosForReflection(Tape<T>& tape, const std::string& name, int pyramid_channels,
                      int gating_channels, Rng& rng);

  Tensor<T> operator()(const FeaturePyramid<T>& p0, const FeaturePyramid<T>& p1) const;

  const Conv2d<T>& projection() const { return proj_; }
  Conv2d<T>& projection() { return proj_; }

 private:
  Conv2d<T> proj_;
};

// Convolutional GRU with an extra feature gate. The three-gate cell computes
//   r = sigmoid(Wr*x + Ur*h + Fr*f)
//   z = sigmoid(Wz*x + Uz*h + Fz*f)
//   p = sigmoid(Wp*x + Up*h + Fp*f)
//   cand = tanh(W*x + U*(r.h) + F*(p.f))
//   h' = (1-z).h + z.cand
// The basic variant drops p and every F term; the none variant is a single
// feed-forward tanh(Wn*x) with no recurrence.
template <typename T>
class GruWeights {
 public:
  GruWeights() = default;
  GruWeights(Tape<T>& tape, const std::string& name, int input_channels, int hidden_channels,
             int gating_channels, GruVariant variant, Rng& rng);

  GruVariant variant() const { return variant_; }
  int hidden_channels() const { return hidden_ch_; }

  Conv2d<T> wr, ur, fr;
  Conv2d<T> wz, uz, fz;
  Conv2d<T> wp, up, fp;
  Conv2d<T> wc, uc, fc;  // candidate-state convolutions (W, U, F)
  Conv2d<T> wn;          // feed-forward path for the none variant

 private:
  GruVariant variant_ = GruVariant::ThreeGate;
  int hidden_ch_ = 0;
};

template <typename T>
GruState<T> gru_cell(const Tensor<T>& x, const GruState<T>& state, const GruWeights<T>& w);

// Runs the cell for `iterations` steps on a constant input, returning every
// state; the loss supervises all of them.
template <typename T>
std::vector<GruState<T>> run_decoder(const Tensor<T>& fused, const Tensor<T>& f,
                                     const GruWeights<T>& w, int iterations,
                                     const Tensor<T>& h0);

}  // namespace scd
