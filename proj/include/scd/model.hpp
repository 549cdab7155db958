#pragma once

#include <memory>
#include <vector>

#include "scd/config.hpp"
#include "scd/correlation.hpp"
#include "scd/decoder.hpp"
#include "scd/encoder.hpp"
#include "scd/tensor.hpp"
#include "scd/upsampler.hpp"

namespace scd {

// The full pipeline: siamese encoder, correlation fusion, recurrent decoder,
// shared upsampler. forward() returns one full-resolution logit map per
// decoder iteration.
template <typename T>
class ChangeModel {
 public:
  ChangeModel(Tape<T>& tape, const RunConfig& config, Rng& rng);

  std::vector<Tensor<T>> forward(const Tensor<T>& img0, const Tensor<T>& img1) const;

  // forward plus the raw decoder states, for callers that inspect the
  // hidden sequence
  struct ForwardTrace {
    std::vector<GruState<T>> states;
    std::vector<Tensor<T>> logits;
  };
  ForwardTrace forward_trace(const Tensor<T>& img0, const Tensor<T>& img1) const;

  // Parameters seen by the optimizer; excludes the encoder when frozen.
  std::vector<typename Tape<T>::Param> trainable_parameters() const;

  const RunConfig& config() const { return config_; }
  const Encoder<T>& encoder() const { return *encoder_; }
  const FusionModule<T>& fusion() const { return *fusion_; }
  const GruWeights<T>& gru() const { return *gru_; }
  const Upsampler<T>& upsampler() const { return *upsampler_; }
  int iterations() const { return config_.iterations; }
  GruVariant variant() const { return variant_; }

 private:
  RunConfig config_;
  Tape<T>* tape_;
  GruVariant variant_;
  std::unique_ptr<Encoder<T>> encoder_;
  std::unique_ptr<FusionModule<T>> fusion_;
  std::unique_ptr<RatiosForReflection<T>> rfr_;  // three-gate only
  std::unique_ptr<Conv2d<T>> h0_conv_;           // h0_mode == "feature"
  std::unique_ptr<GruWeights<T>> gru_;
  std::unique_ptr<Upsampler<T>> upsampler_;
};

}  // namespace scd
