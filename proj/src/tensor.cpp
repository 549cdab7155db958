#include "scd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "scd/gemm.hpp"

namespace scd {

std::string Shape::str() const {
  return "(" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + ")";
}

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape s) : d_(std::make_shared<TensorData<T>>()) {
  check(s.numel() > 0, "tensor shape " + s.str() + " must have positive extents");
  d_->shape = s;
  d_->value.assign(static_cast<std::size_t>(s.numel()), T(0));
}

template <typename T>
Tensor<T>::Tensor(Shape s, std::vector<T> values) : d_(std::make_shared<TensorData<T>>()) {
  check(s.numel() == static_cast<std::int64_t>(values.size()),
        "tensor shape " + s.str() + " does not match value count " +
            std::to_string(values.size()));
  d_->shape = s;
  d_->value = std::move(values);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape s, T x) {
  Tensor<T> t(s);
  std::fill(t.d_->value.begin(), t.d_->value.end(), x);
  return t;
}

template <typename T>
T Tensor<T>::item() const {
  check(numel() == 1, "item() requires a scalar tensor, got shape " + shape().str());
  return d_->value[0];
}

template <typename T>
const std::vector<T>& Tensor<T>::grad() const {
  if (!d_ || !d_->requires_grad)
    throw std::logic_error("grad() on a tensor that does not require gradients");
  d_->ensure_grad();
  return d_->grad;
}

template <typename T>
Tensor<T> Tape<T>::variable(Shape s, std::vector<T> values) {
  Tensor<T> t(s, std::move(values));
  t.d_->requires_grad = true;
  t.tape_ = this;
  return t;
}

template <typename T>
Tensor<T> Tape<T>::parameter(const std::string& name, Shape s, std::vector<T> values) {
  if (find_parameter(name))
    throw std::invalid_argument("duplicate parameter name: " + name);
  Tensor<T> t = variable(s, std::move(values));
  t.d_->ensure_grad();
  params_.push_back(Param{name, t});
  return t;
}

template <typename T>
const Tensor<T>* Tape<T>::find_parameter(const std::string& name) const {
  for (const Param& p : params_)
    if (p.name == name) return &p.tensor;
  return nullptr;
}

template <typename T>
void Tape<T>::backward(const Tensor<T>& loss) {
  if (loss.tape() != this)
    throw std::invalid_argument("backward: loss is not connected to this tape");
  if (loss.numel() != 1)
    throw std::invalid_argument("backward: loss must be scalar, got shape " + loss.shape().str());
  loss.d_->ensure_grad();
  loss.d_->grad[0] += T(1);
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) (*it)();
}

template <typename T>
void Tape<T>::zero_grad() {
  for (Param& p : params_) {
    auto& g = p.tensor.d_->grad;
    std::fill(g.begin(), g.end(), T(0));
  }
}

namespace detail {

template <typename T>
Tape<T>* OpBuilder<T>::tape_for(std::initializer_list<const Tensor<T>*> inputs) {
  Tape<T>* tape = nullptr;
  for (const Tensor<T>* t : inputs) {
    if (!t->defined() || !t->requires_grad()) continue;
    if (tape && t->tape() != tape)
      throw std::invalid_argument("op inputs belong to different tapes");
    tape = t->tape();
  }
  if (tape && !tape->recording()) return nullptr;
  return tape;
}

template <typename T>
Tensor<T> OpBuilder<T>::output(Tape<T>* tape, Shape s) {
  Tensor<T> t(s);
  if (tape) {
    t.d_->requires_grad = true;
    t.tape_ = tape;
  }
  return t;
}

template struct OpBuilder<float>;
template struct OpBuilder<double>;

}  // namespace detail

namespace {

template <typename T>
using Data = std::shared_ptr<TensorData<T>>;

template <typename T>
bool wants_grad(const Data<T>& d) {
  return d->requires_grad;
}

// column layout: row (c*kh+ky)*kw+kx, column oy*ow+ox
template <typename T>
void im2col(const T* x, int cin, int h, int w, int kh, int kw, int stride, int pad, int oh, int ow,
            T* col) {
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        T* row = col + (static_cast<std::size_t>(c) * kh * kw + ky * kw + kx) *
                           (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            row[oy * ow + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                                    ? x[(static_cast<std::size_t>(c) * h + iy) * w + ix]
                                    : T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const T* col, int cin, int h, int w, int kh, int kw, int stride, int pad, int oh,
                int ow, T* dx) {
  for (int c = 0; c < cin; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const T* row = col + (static_cast<std::size_t>(c) * kh * kw + ky * kw + kx) *
                                 (static_cast<std::size_t>(oh) * ow);
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix < 0 || ix >= w) continue;
            dx[(static_cast<std::size_t>(c) * h + iy) * w + ix] += row[oy * ow + ox];
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int padding) {
  using OB = detail::OpBuilder<T>;
  const Shape xs = input.shape(), ws = weight.shape(), bs = bias.shape();
  check(stride >= 1, "conv2d: stride must be >= 1");
  check(padding >= 0, "conv2d: padding must be >= 0");
  check(ws.c == xs.c, "conv2d: weight expects " + std::to_string(ws.c) +
                          " input channels but input has shape " + xs.str());
  check(bs == Shape{1, ws.n, 1, 1},
        "conv2d: bias shape " + bs.str() + " must be (1," + std::to_string(ws.n) + ",1,1)");
  const int oh = (xs.h + 2 * padding - ws.h) / stride + 1;
  const int ow = (xs.w + 2 * padding - ws.w) / stride + 1;
  check(xs.h + 2 * padding >= ws.h && xs.w + 2 * padding >= ws.w && oh >= 1 && ow >= 1,
        "conv2d: kernel " + ws.str() + " does not fit input " + xs.str() + " with padding " +
            std::to_string(padding));

  const int cin = xs.c, cout = ws.n, kh = ws.h, kw = ws.w;
  const int kcol = cin * kh * kw;
  const int ncol = oh * ow;

  Tape<T>* tape = OB::tape_for({&input, &weight, &bias});
  Tensor<T> out = OB::output(tape, Shape{xs.n, cout, oh, ow});

  std::vector<T> col(static_cast<std::size_t>(kcol) * ncol);
  const std::size_t x_plane = static_cast<std::size_t>(cin) * xs.h * xs.w;
  const std::size_t y_plane = static_cast<std::size_t>(cout) * oh * ow;
  for (int n = 0; n < xs.n; ++n) {
    im2col(input.value().data() + n * x_plane, cin, xs.h, xs.w, kh, kw, stride, padding, oh, ow,
           col.data());
    T* y = out.value().data() + n * y_plane;
    gemm_nn(cout, ncol, kcol, weight.value().data(), kcol, col.data(), ncol, y, ncol, false);
    for (int oc = 0; oc < cout; ++oc) {
      const T b = bias.value()[oc];
      T* row = y + static_cast<std::size_t>(oc) * ncol;
      for (int i = 0; i < ncol; ++i) row[i] += b;
    }
  }

  if (tape) {
    Data<T> xd = OB::data(input), wd = OB::data(weight), bd = OB::data(bias), yd = OB::data(out);
    OB::record(tape, [xd, wd, bd, yd, stride, padding, oh, ow, cin, cout, kh, kw, kcol, ncol]() {
      if (yd->grad.empty()) return;
      const Shape xs = xd->shape;
      const std::size_t x_plane = static_cast<std::size_t>(cin) * xs.h * xs.w;
      const std::size_t y_plane = static_cast<std::size_t>(cout) * oh * ow;
      const bool gx = wants_grad(xd), gw = wants_grad(wd), gb = wants_grad(bd);
      if (gx) xd->ensure_grad();
      if (gw) wd->ensure_grad();
      if (gb) bd->ensure_grad();
      std::vector<T> col(static_cast<std::size_t>(kcol) * ncol);
      std::vector<T> colt, dcol;
      if (gw) colt.resize(col.size());
      if (gx) dcol.resize(col.size());
      for (int n = 0; n < xs.n; ++n) {
        const T* dy = yd->grad.data() + n * y_plane;
        if (gx || gw)
          im2col(xd->value.data() + n * x_plane, cin, xs.h, xs.w, kh, kw, stride, padding, oh, ow,
                 col.data());
        if (gw) {
          for (int r = 0; r < kcol; ++r)
            for (int i = 0; i < ncol; ++i)
              colt[static_cast<std::size_t>(i) * kcol + r] =
                  col[static_cast<std::size_t>(r) * ncol + i];
          gemm_nn(cout, kcol, ncol, dy, ncol, colt.data(), kcol, wd->grad.data(), kcol, true);
        }
        if (gb) {
          for (int oc = 0; oc < cout; ++oc) {
            T s = T(0);
            const T* row = dy + static_cast<std::size_t>(oc) * ncol;
            for (int i = 0; i < ncol; ++i) s += row[i];
            bd->grad[oc] += s;
          }
        }
        if (gx) {
          gemm_tn(kcol, ncol, cout, wd->value.data(), kcol, dy, ncol, dcol.data(), ncol, false);
          col2im_add(dcol.data(), cin, xs.h, xs.w, kh, kw, stride, padding, oh, ow,
                     xd->grad.data() + n * x_plane);
        }
      }
    });
  }
  return out;
}

namespace {

template <typename T, typename Fwd, typename Bwd>
Tensor<T> unary_elementwise(const Tensor<T>& x, Fwd fwd, Bwd bwd_factor) {
  using OB = detail::OpBuilder<T>;
  Tape<T>* tape = OB::tape_for({&x});
  Tensor<T> out = OB::output(tape, x.shape());
  const std::size_t n = x.value().size();
  for (std::size_t i = 0; i < n; ++i) out.value()[i] = fwd(x.value()[i]);
  if (tape) {
    Data<T> xd = OB::data(x), yd = OB::data(out);
    OB::record(tape, [xd, yd, bwd_factor]() {
      if (yd->grad.empty() || !wants_grad(xd)) return;
      xd->ensure_grad();
      const std::size_t n = xd->value.size();
      for (std::size_t i = 0; i < n; ++i)
        xd->grad[i] += yd->grad[i] * bwd_factor(xd->value[i], yd->value[i]);
    });
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary_elementwise(
      x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary_elementwise(x, [](T v) { return std::tanh(v); },
                           [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary_elementwise(x, [](T v) { return v > T(0) ? v : T(0); },
                           [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& x) {
  using OB = detail::OpBuilder<T>;
  Tape<T>* tape = OB::tape_for({&x});
  const Shape s = x.shape();
  Tensor<T> out = OB::output(tape, s);
  const std::size_t plane = static_cast<std::size_t>(s.h) * s.w;
  const std::size_t batch_stride = static_cast<std::size_t>(s.c) * plane;
  for (int n = 0; n < s.n; ++n) {
    const T* xv = x.value().data() + n * batch_stride;
    T* yv = out.value().data() + n * batch_stride;
    for (std::size_t p = 0; p < plane; ++p) {
      T m = xv[p];
      for (int c = 1; c < s.c; ++c) m = std::max(m, xv[c * plane + p]);
      T z = T(0);
      for (int c = 0; c < s.c; ++c) {
        const T e = std::exp(xv[c * plane + p] - m);
        yv[c * plane + p] = e;
        z += e;
      }
      for (int c = 0; c < s.c; ++c) yv[c * plane + p] /= z;
    }
  }
  if (tape) {
    Data<T> xd = OB::data(x), yd = OB::data(out);
    OB::record(tape, [xd, yd, s, plane, batch_stride]() {
      if (yd->grad.empty() || !wants_grad(xd)) return;
      xd->ensure_grad();
      for (int n = 0; n < s.n; ++n) {
        const T* yv = yd->value.data() + n * batch_stride;
        const T* dy = yd->grad.data() + n * batch_stride;
        T* dx = xd->grad.data() + n * batch_stride;
        for (std::size_t p = 0; p < plane; ++p) {
          T dot = T(0);
          for (int c = 0; c < s.c; ++c) dot += dy[c * plane + p] * yv[c * plane + p];
          for (int c = 0; c < s.c; ++c)
            dx[c * plane + p] += yv[c * plane + p] * (dy[c * plane + p] - dot);
        }
      }
    });
  }
  return out;
}

namespace {

struct LerpCoord {
  int lo, hi;
  double frac;
};

inline LerpCoord align_corners_coord(int out_i, int in_size, int out_size) {
  double src = 0.0;
  if (out_size > 1)
    src = static_cast<double>(out_i) * (in_size - 1) / static_cast<double>(out_size - 1);
  int lo = static_cast<int>(src);
  if (lo > in_size - 1) lo = in_size - 1;
  int hi = std::min(lo + 1, in_size - 1);
  return {lo, hi, src - lo};
}

}  // namespace

template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, int out_h, int out_w) {
  using OB = detail::OpBuilder<T>;
  check(out_h >= 1 && out_w >= 1, "bilinear_resize: target size must be >= 1");
  const Shape s = x.shape();
  Tape<T>* tape = OB::tape_for({&x});
  Tensor<T> out = OB::output(tape, Shape{s.n, s.c, out_h, out_w});
  const std::size_t in_plane = static_cast<std::size_t>(s.h) * s.w;
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T* xv = x.value().data() + (static_cast<std::size_t>(n) * s.c + c) * in_plane;
      T* yv = out.value().data() + (static_cast<std::size_t>(n) * s.c + c) * out_plane;
      for (int oy = 0; oy < out_h; ++oy) {
        const LerpCoord yc = align_corners_coord(oy, s.h, out_h);
        for (int ox = 0; ox < out_w; ++ox) {
          const LerpCoord xc = align_corners_coord(ox, s.w, out_w);
          const double v00 = xv[yc.lo * s.w + xc.lo];
          const double v01 = xv[yc.lo * s.w + xc.hi];
          const double v10 = xv[yc.hi * s.w + xc.lo];
          const double v11 = xv[yc.hi * s.w + xc.hi];
          const double top = v00 + (v01 - v00) * xc.frac;
          const double bot = v10 + (v11 - v10) * xc.frac;
          yv[oy * out_w + ox] = static_cast<T>(top + (bot - top) * yc.frac);
        }
      }
    }
  }
  if (tape) {
    Data<T> xd = OB::data(x), yd = OB::data(out);
    OB::record(tape, [xd, yd, s, out_h, out_w, in_plane, out_plane]() {
      if (yd->grad.empty() || !wants_grad(xd)) return;
      xd->ensure_grad();
      for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
          T* dx = xd->grad.data() + (static_cast<std::size_t>(n) * s.c + c) * in_plane;
          const T* dy = yd->grad.data() + (static_cast<std::size_t>(n) * s.c + c) * out_plane;
          for (int oy = 0; oy < out_h; ++oy) {
            const LerpCoord yc = align_corners_coord(oy, s.h, out_h);
            for (int ox = 0; ox < out_w; ++ox) {
              const LerpCoord xc = align_corners_coord(ox, s.w, out_w);
              const double g = dy[oy * out_w + ox];
              dx[yc.lo * s.w + xc.lo] += static_cast<T>(g * (1 - yc.frac) * (1 - xc.frac));
              dx[yc.lo * s.w + xc.hi] += static_cast<T>(g * (1 - yc.frac) * xc.frac);
              dx[yc.hi * s.w + xc.lo] += static_cast<T>(g * yc.frac * (1 - xc.frac));
              dx[yc.hi * s.w + xc.hi] += static_cast<T>(g * yc.frac * xc.frac);
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& xs) {
  using OB = detail::OpBuilder<T>;
  check(!xs.empty(), "concat_channels: needs at least one input");
  const Shape first = xs.front().shape();
  int total_c = 0;
  std::vector<const Tensor<T>*> ptrs;
  for (const Tensor<T>& t : xs) {
    const Shape s = t.shape();
    check(s.n == first.n && s.h == first.h && s.w == first.w,
          "concat_channels: input " + s.str() + " does not match " + first.str() +
              " in batch/spatial dims");
    total_c += s.c;
    ptrs.push_back(&t);
  }
  Tape<T>* tape = nullptr;
  for (const Tensor<T>* t : ptrs) {
    Tape<T>* ti = OB::tape_for({t});
    if (ti) {
      check(!tape || tape == ti, "concat_channels: inputs on different tapes");
      tape = ti;
    }
  }
  Tensor<T> out = OB::output(tape, Shape{first.n, total_c, first.h, first.w});
  const std::size_t plane = static_cast<std::size_t>(first.h) * first.w;
  for (int n = 0; n < first.n; ++n) {
    std::size_t c_off = 0;
    for (const Tensor<T>& t : xs) {
      const std::size_t nch = t.shape().c;
      const T* src = t.value().data() + static_cast<std::size_t>(n) * nch * plane;
      T* dst = out.value().data() +
               (static_cast<std::size_t>(n) * total_c + c_off) * plane;
      std::copy(src, src + nch * plane, dst);
      c_off += nch;
    }
  }
  if (tape) {
    std::vector<Data<T>> ins;
    for (const Tensor<T>& t : xs) ins.push_back(OB::data(t));
    Data<T> yd = OB::data(out);
    const int n_batch = first.n;
    OB::record(tape, [ins, yd, total_c, plane, n_batch]() {
      if (yd->grad.empty()) return;
      for (int n = 0; n < n_batch; ++n) {
        std::size_t c_off = 0;
        for (const Data<T>& xd : ins) {
          const std::size_t nch = xd->shape.c;
          if (wants_grad(xd)) {
            xd->ensure_grad();
            const T* dy = yd->grad.data() +
                          (static_cast<std::size_t>(n) * total_c + c_off) * plane;
            T* dx = xd->grad.data() + static_cast<std::size_t>(n) * nch * plane;
            for (std::size_t i = 0; i < nch * plane; ++i) dx[i] += dy[i];
          }
          c_off += nch;
        }
      }
    });
  }
  return out;
}

namespace {

template <typename T, typename Fwd>
Tensor<T> binary_elementwise(const Tensor<T>& x, const Tensor<T>& y, const char* name, Fwd fwd,
                             std::function<void(const Data<T>&, const Data<T>&, const Data<T>&)> bwd) {
  using OB = detail::OpBuilder<T>;
  check(x.shape() == y.shape(), std::string(name) + ": shape mismatch " + x.shape().str() +
                                    " vs " + y.shape().str());
  Tape<T>* tape = OB::tape_for({&x, &y});
  Tensor<T> out = OB::output(tape, x.shape());
  const std::size_t n = x.value().size();
  for (std::size_t i = 0; i < n; ++i) out.value()[i] = fwd(x.value()[i], y.value()[i]);
  if (tape) {
    Data<T> xd = OB::data(x), yd = OB::data(y), od = OB::data(out);
    OB::record(tape, [xd, yd, od, bwd]() {
      if (od->grad.empty()) return;
      bwd(xd, yd, od);
    });
  }
  return out;
}

}  // namespace

template <typename T>
Tensor<T> add(const Tensor<T>& x, const Tensor<T>& y) {
  return binary_elementwise<T>(
      x, y, "add", [](T a, T b) { return a + b; },
      [](const Data<T>& xd, const Data<T>& yd, const Data<T>& od) {
        const std::size_t n = od->grad.size();
        if (wants_grad(xd)) {
          xd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) xd->grad[i] += od->grad[i];
        }
        if (wants_grad(yd)) {
          yd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) yd->grad[i] += od->grad[i];
        }
      });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& x, const Tensor<T>& y) {
  return binary_elementwise<T>(
      x, y, "sub", [](T a, T b) { return a - b; },
      [](const Data<T>& xd, const Data<T>& yd, const Data<T>& od) {
        const std::size_t n = od->grad.size();
        if (wants_grad(xd)) {
          xd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) xd->grad[i] += od->grad[i];
        }
        if (wants_grad(yd)) {
          yd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) yd->grad[i] -= od->grad[i];
        }
      });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& x, const Tensor<T>& y) {
  return binary_elementwise<T>(
      x, y, "mul", [](T a, T b) { return a * b; },
      [](const Data<T>& xd, const Data<T>& yd, const Data<T>& od) {
        const std::size_t n = od->grad.size();
        if (wants_grad(xd)) {
          xd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) xd->grad[i] += od->grad[i] * yd->value[i];
        }
        if (wants_grad(yd)) {
          yd->ensure_grad();
          for (std::size_t i = 0; i < n; ++i) yd->grad[i] += od->grad[i] * xd->value[i];
        }
      });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s) {
  return unary_elementwise(x, [s](T v) { return s * v; }, [s](T, T) { return s; });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  using OB = detail::OpBuilder<T>;
  Tape<T>* tape = OB::tape_for({&x});
  Tensor<T> out = OB::output(tape, Shape{1, 1, 1, 1});
  double acc = 0;
  for (T v : x.value()) acc += static_cast<double>(v);
  out.value()[0] = static_cast<T>(acc);
  if (tape) {
    Data<T> xd = OB::data(x), yd = OB::data(out);
    OB::record(tape, [xd, yd]() {
      if (yd->grad.empty() || !wants_grad(xd)) return;
      xd->ensure_grad();
      const T g = yd->grad[0];
      for (T& v : xd->grad) v += g;
    });
  }
  return out;
}

#define SCD_INSTANTIATE(T)                                                                        \
  template class Tensor<T>;                                                                       \
  template class Tape<T>;                                                                         \
  template Tensor<T> conv2d<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, int, int);  \
  template Tensor<T> sigmoid<T>(const Tensor<T>&);                                               \
  template Tensor<T> tanh<T>(const Tensor<T>&);                                                  \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                  \
  template Tensor<T> softmax_channels<T>(const Tensor<T>&);                                      \
  template Tensor<T> bilinear_resize<T>(const Tensor<T>&, int, int);                             \
  template Tensor<T> concat_channels<T>(const std::vector<Tensor<T>>&);                          \
  template Tensor<T> add<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> sub<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> mul<T>(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> scale<T>(const Tensor<T>&, T);                                              \
  template Tensor<T> sum<T>(const Tensor<T>&);

SCD_INSTANTIATE(float)
SCD_INSTANTIATE(double)

#undef SCD_INSTANTIATE

}  // namespace scd
