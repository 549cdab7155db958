#include "scd/model.hpp"

#include <stdexcept>

namespace scd {

template <typename T>
ChangeModel<T>::ChangeModel(Tape<T>& tape, const RunConfig& config, Rng& rng)
    : config_(config), tape_(&tape), variant_(gru_variant_from_string(config.gru_variant)) {
  config.validate();

  EncoderConfig enc;
  enc.feature_channels = config.feature_channels;
  enc.depth = config.encoder_depth;
  enc.frozen = config.encoder_frozen;
  encoder_ = std::make_unique<Encoder<T>>(tape, "encoder", enc, rng);

  fusion_ = std::make_unique<FusionModule<T>>(
      tape, "fusion", config.feature_channels, config.reduced_channels,
      fusion_mode_from_string(config.fusion_mode), config.corr_radius, config.corr_patch_radius,
      config.corr_top_level_only, rng);

  const int grid = config.image_size / 16;
  const int fused_ch = fusion_->fused_channels(grid, grid);

  if (variant_ == GruVariant::ThreeGate)
    rfr_ = std::make_unique<RatiosForReflection<T>>(tape, "decoder_init.rfr",
                                                    4 * config.feature_channels,
                                                    config.gating_channels, rng);
  if (variant_ != GruVariant::None && config.h0_mode == "feature")
    h0_conv_ = std::make_unique<Conv2d<T>>(tape, "decoder_init.h0", fused_ch,
                                           config.hidden_channels, 3, 1, 1, rng);
  gru_ = std::make_unique<GruWeights<T>>(tape, "decoder.gru", fused_ch, config.hidden_channels,
                                         config.gating_channels, variant_, rng);
  upsampler_ = std::make_unique<Upsampler<T>>(tape, "upsampler", config.hidden_channels, rng);
}

template <typename T>
typename ChangeModel<T>::ForwardTrace ChangeModel<T>::forward_trace(const Tensor<T>& img0,
                                                                    const Tensor<T>& img1) const {
  if (img0.shape() != img1.shape())
    throw std::invalid_argument("forward: image pair differs in shape, " + img0.shape().str() +
                                " vs " + img1.shape().str());
  const int h = img0.shape().h, w = img0.shape().w;

  const FeaturePyramid<T> p0 = encoder_->encode(img0);
  const FeaturePyramid<T> p1 = encoder_->encode(img1);
  const FusedFeature<T> fused = fusion_->fuse(p0, p1);

  Tensor<T> f;
  if (variant_ == GruVariant::ThreeGate) f = (*rfr_)(p0, p1);

  Tensor<T> h0;
  if (variant_ != GruVariant::None) {
    h0 = h0_conv_ ? scd::tanh((*h0_conv_)(fused.values))
                  : Tensor<T>(Shape{1, config_.hidden_channels, h / 16, w / 16});
  }

  ForwardTrace trace;
  trace.states = run_decoder(fused.values, f, *gru_, config_.iterations, h0);
  trace.logits.reserve(trace.states.size());
  for (const GruState<T>& s : trace.states) trace.logits.push_back((*upsampler_)(s.h, h, w));
  return trace;
}

template <typename T>
std::vector<Tensor<T>> ChangeModel<T>::forward(const Tensor<T>& img0,
                                               const Tensor<T>& img1) const {
  return forward_trace(img0, img1).logits;
}

template <typename T>
std::vector<typename Tape<T>::Param> ChangeModel<T>::trainable_parameters() const {
  std::vector<typename Tape<T>::Param> out;
  for (const auto& p : tape_->parameters()) {
    if (config_.encoder_frozen && p.name.starts_with("encoder.")) continue;
    out.push_back(p);
  }
  return out;
}

template class ChangeModel<float>;
template class ChangeModel<double>;

}  // namespace scd
