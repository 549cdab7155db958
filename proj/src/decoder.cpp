#include "scd/decoder.hpp"

#include <stdexcept>

namespace scd {

GruVariant gru_variant_from_string(const std::string& s) {
  if (s == "none") return GruVariant::None;
  if (s == "basic") return GruVariant::Basic;
  if (s == "three-gate") return GruVariant::ThreeGate;
  throw std::invalid_argument("unknown gru variant: " + s);
}

std::string to_string(GruVariant v) {
  switch (v) {
    case GruVariant::None: return "none";
    case GruVariant::Basic: return "basic";
    case GruVariant::ThreeGate: return "three-gate";
  }
  return "?";
}

template <typename T>
RatiosForReflection<T>::RatiosForReflection(Tape<T>& tape, const std::string& name,
                                            int pyramid_channels, int gating_channels, Rng& rng)
    : proj_(tape, name + ".proj", pyramid_channels, gating_channels, 3, 1, 1, rng) {}

template <typename T>
Tensor<T> RatiosForReflection<T>::operator()(const FeaturePyramid<T>& p0,
                                             const FeaturePyramid<T>& p1) const {
  std::vector<Tensor<T>> diffs;
  diffs.reserve(4);
  for (int i = 0; i < 4; ++i) diffs.push_back(sub(p0.levels[i], p1.levels[i]));
  return sigmoid(proj_(concat_channels(diffs)));
}

template <typename T>
GruWeights<T>::GruWeights(Tape<T>& tape, const std::string& name, int input_channels,
                          int hidden_channels, int gating_channels, GruVariant variant, Rng& rng)
    : variant_(variant), hidden_ch_(hidden_channels) {
  const int cx = input_channels, ch = hidden_channels, cg = gating_channels;
  if (variant == GruVariant::None) {
    wn = Conv2d<T>(tape, name + ".wn", cx, ch, 3, 1, 1, rng);
    return;
  }
  wr = Conv2d<T>(tape, name + ".wr", cx, ch, 3, 1, 1, rng);
  ur = Conv2d<T>(tape, name + ".ur", ch, ch, 3, 1, 1, rng);
  wz = Conv2d<T>(tape, name + ".wz", cx, ch, 3, 1, 1, rng);
  uz = Conv2d<T>(tape, name + ".uz", ch, ch, 3, 1, 1, rng);
  wc = Conv2d<T>(tape, name + ".wc", cx, ch, 3, 1, 1, rng);
  uc = Conv2d<T>(tape, name + ".uc", ch, ch, 3, 1, 1, rng);
  if (variant == GruVariant::ThreeGate) {
    fr = Conv2d<T>(tape, name + ".fr", cg, ch, 1, 1, 0, rng);
    fz = Conv2d<T>(tape, name + ".fz", cg, ch, 1, 1, 0, rng);
    wp = Conv2d<T>(tape, name + ".wp", cx, ch, 3, 1, 1, rng);
    up = Conv2d<T>(tape, name + ".up", ch, ch, 3, 1, 1, rng);
    fp = Conv2d<T>(tape, name + ".fp", cg, ch, 1, 1, 0, rng);
    fc = Conv2d<T>(tape, name + ".fc", cg, ch, 1, 1, 0, rng);
  }
}

template <typename T>
GruState<T> gru_cell(const Tensor<T>& x, const GruState<T>& state, const GruWeights<T>& w) {
  const GruVariant variant = w.variant();
  if (variant == GruVariant::None) {
    if (state.step > 0)
      throw std::invalid_argument("gru_cell: variant 'none' has no state to carry beyond step 0");
    return GruState<T>{tanh(w.wn(x)), 1, state.f};
  }

  const Tensor<T>& h = state.h;
  if (h.shape().h != x.shape().h || h.shape().w != x.shape().w)
    throw std::invalid_argument("gru_cell: hidden state " + h.shape().str() +
                                " does not match input " + x.shape().str() + " spatially");

  Tensor<T> r, z, cand;
  if (variant == GruVariant::ThreeGate) {
    const Tensor<T>& f = state.f;
    if (f.shape().h != x.shape().h || f.shape().w != x.shape().w)
      throw std::invalid_argument("gru_cell: gating map " + f.shape().str() +
                                  " does not match input " + x.shape().str() + " spatially");
    r = sigmoid(add(add(w.wr(x), w.ur(h)), w.fr(f)));
    z = sigmoid(add(add(w.wz(x), w.uz(h)), w.fz(f)));
    Tensor<T> p = sigmoid(add(add(w.wp(x), w.up(h)), w.fp(f)));
    cand = tanh(add(add(w.wc(x), w.uc(mul(r, h))), w.fc(mul(p, f))));
  } else {
    r = sigmoid(add(w.wr(x), w.ur(h)));
    z = sigmoid(add(w.wz(x), w.uz(h)));
    cand = tanh(add(w.wc(x), w.uc(mul(r, h))));
  }
  const Tensor<T> ones = Tensor<T>::ones(z.shape());
  Tensor<T> h_next = add(mul(sub(ones, z), h), mul(z, cand));
  return GruState<T>{std::move(h_next), state.step + 1, state.f};
}

template <typename T>
std::vector<GruState<T>> run_decoder(const Tensor<T>& fused, const Tensor<T>& f,
                                     const GruWeights<T>& w, int iterations,
                                     const Tensor<T>& h0) {
  if (iterations < 1)
    throw std::invalid_argument("run_decoder: iteration count must be >= 1, got " +
                                std::to_string(iterations));
  if (w.variant() == GruVariant::None && iterations != 1)
    throw std::invalid_argument("run_decoder: variant 'none' supports exactly 1 iteration");
  if (w.variant() != GruVariant::None && !h0.defined())
    throw std::invalid_argument("run_decoder: recurrent variants need an initial hidden state");
  if (w.variant() == GruVariant::ThreeGate && !f.defined())
    throw std::invalid_argument("run_decoder: three-gate variant needs the gating map");
  GruState<T> state{h0, 0, f};
  std::vector<GruState<T>> states;
  states.reserve(iterations);
  for (int t = 0; t < iterations; ++t) {
    state = gru_cell(fused, state, w);
    states.push_back(state);
  }
  return states;
}

#define SCD_INSTANTIATE(T)                                                                      \
  template class RatiosForReflection<T>;                                                        \
  template class GruWeights<T>;                                                                 \
  template GruState<T> gru_cell<T>(const Tensor<T>&, const GruState<T>&, const GruWeights<T>&); \
  template std::vector<GruState<T>> run_decoder<T>(const Tensor<T>&, const Tensor<T>&,         \
                                                   const GruWeights<T>&, int, const Tensor<T>&);

SCD_INSTANTIATE(float)
SCD_INSTANTIATE(double)

#undef SCD_INSTANTIATE

}  // namespace scd
