#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace scd {

struct Shape {
  int n = 0, c = 0, h = 0, w = 0;
  bool operator==(const Shape&) const = default;
  std::int64_t numel() const {
    return static_cast<std::int64_t>(n) * c * h * w;
  }
  std::string str() const;
};

template <typename T>
class Tape;

namespace detail {
template <typename T>
struct OpBuilder;
}

template <typename T>
struct TensorData {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;  // empty until first touched by backward()
  bool requires_grad = false;
  void ensure_grad() {
    if (grad.empty()) grad.assign(value.size(), T(0));
  }
};

// Dense (batch, channels, height, width) array. Copies share storage; a
// tensor created by an op on tracked inputs participates in that tape's
// reverse pass.
template <typename T>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s);
  Tensor(Shape s, std::vector<T> values);

  static Tensor full(Shape s, T x);
  static Tensor ones(Shape s) { return full(s, T(1)); }

  bool defined() const { return static_cast<bool>(d_); }
  const Shape& shape() const { return d_->shape; }
  std::int64_t numel() const { return d_->shape.numel(); }

  const std::vector<T>& value() const { return d_->value; }
  std::vector<T>& value() { return d_->value; }

  T at(int n, int c, int y, int x) const { return d_->value[offset(n, c, y, x)]; }
  T& at(int n, int c, int y, int x) { return d_->value[offset(n, c, y, x)]; }

  // Scalar tensors only.
  T item() const;

  bool requires_grad() const { return d_ && d_->requires_grad; }
  Tape<T>* tape() const { return tape_; }

  // Accumulated gradient; zeros if backward() has not reached this tensor.
  const std::vector<T>& grad() const;

 private:
  std::size_t offset(int n, int c, int y, int x) const {
    const Shape& s = d_->shape;
    return ((static_cast<std::size_t>(n) * s.c + c) * s.h + y) * s.w + x;
  }

  std::shared_ptr<TensorData<T>> d_;
  Tape<T>* tape_ = nullptr;

  friend class Tape<T>;
  friend struct detail::OpBuilder<T>;
};

// Records every differentiable op applied to its tensors, in order, together
// with a backward closure; also owns the named-parameter registry.
template <typename T>
class Tape {
 public:
  struct Param {
    std::string name;
    Tensor<T> tensor;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Tracked leaf (gets a gradient, not registered as a parameter).
  Tensor<T> variable(Shape s, std::vector<T> values);

  // Tracked leaf registered under a unique name.
  Tensor<T> parameter(const std::string& name, Shape s, std::vector<T> values);

  const std::vector<Param>& parameters() const { return params_; }
  std::vector<Param>& parameters() { return params_; }
  const Tensor<T>* find_parameter(const std::string& name) const;

  // Reverse pass from a scalar loss. Grads accumulate; calling twice without
  // zero_grad() doubles them.
  void backward(const Tensor<T>& loss);

  void zero_grad();
  void clear_ops() { ops_.clear(); }
  std::size_t op_count() const { return ops_.size(); }

  bool recording() const { return recording_; }
  void set_recording(bool on) { recording_ = on; }

 private:
  std::vector<std::function<void()>> ops_;
  std::vector<Param> params_;
  bool recording_ = true;

  friend struct detail::OpBuilder<T>;
};

// Suspends op recording on a tape for the current scope (inference, finite
// difference probes).
template <typename T>
class NoGradScope {
 public:
  explicit NoGradScope(Tape<T>& tape) : tape_(&tape), prev_(tape.recording()) {
    tape_->set_recording(false);
  }
  ~NoGradScope() { tape_->set_recording(prev_); }
  NoGradScope(const NoGradScope&) = delete;
  NoGradScope& operator=(const NoGradScope&) = delete;

 private:
  Tape<T>* tape_;
  bool prev_;
};

namespace detail {

// Access used by op implementations (tensor.cpp, correlation.cpp, loss.cpp).
template <typename T>
struct OpBuilder {
  static std::shared_ptr<TensorData<T>> data(const Tensor<T>& t) { return t.d_; }

  // Common tape of all tracked inputs; nullptr when untracked or recording is off.
  static Tape<T>* tape_for(std::initializer_list<const Tensor<T>*> inputs);

  static Tensor<T> output(Tape<T>* tape, Shape s);

  static void record(Tape<T>* tape, std::function<void()> fn) {
    tape->ops_.push_back(std::move(fn));
  }
};

}  // namespace detail

// ---- differentiable primitives ------------------------------------------

// Zero-padded 2-D convolution; weight is (out_ch, in_ch, kh, kw), bias is
// (1, out_ch, 1, 1).
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias,
                 int stride, int padding);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> tanh(const Tensor<T>& x);
template <typename T>
Tensor<T> relu(const Tensor<T>& x);

// Per-pixel softmax over the channel dimension.
template <typename T>
Tensor<T> softmax_channels(const Tensor<T>& x);

// Exact bilinear interpolation with align-corners semantics (corner pixels
// map to corner pixels).
template <typename T>
Tensor<T> bilinear_resize(const Tensor<T>& x, int out_h, int out_w);

template <typename T>
Tensor<T> concat_channels(const std::vector<Tensor<T>>& xs);

template <typename T>
Tensor<T> add(const Tensor<T>& x, const Tensor<T>& y);
template <typename T>
Tensor<T> sub(const Tensor<T>& x, const Tensor<T>& y);
template <typename T>
Tensor<T> mul(const Tensor<T>& x, const Tensor<T>& y);

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T s);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);

}  // namespace scd
