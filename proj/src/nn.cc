// Copyright 2026 The NIDS Workbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nids/nn.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "nids/errors.h"

namespace nids::nn {

std::string ToString(const Shape& s) {
  return "(" + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + ")";
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size()) {
    throw ShapeMismatchError("tensor of shape " + ToString(shape_) +
                             " given " + std::to_string(data_.size()) +
                             " values");
  }
}

Tensor Tensor::Reshaped(Shape shape) const { return Tensor(shape, data_); }

// ---------------------------------------------------------------------------

Tensor Conv2dForward(const Tensor& input, const Kernel& kernel) {
  const Shape in = input.shape();
  if (in.c != kernel.in_channels) {
    throw ShapeMismatchError("conv input has " + std::to_string(in.c) +
                             " channels, kernel expects " +
                             std::to_string(kernel.in_channels));
  }
  if (in.h == 0 || in.w == 0) {
    throw ShapeMismatchError("conv input has empty spatial extent " +
                             ToString(in));
  }
  const size_t H = in.h, W = in.w;
  Tensor out(Shape{kernel.out_channels, H, W});
  for (size_t o = 0; o < kernel.out_channels; ++o) {
    double* dst = &out.at(o, 0, 0);
    std::fill(dst, dst + H * W, kernel.bias[o]);
    for (size_t i = 0; i < in.c; ++i) {
      const double* src = &input.at(i, 0, 0);
      for (size_t ky = 0; ky < kKernelSide; ++ky) {
        for (size_t kx = 0; kx < kKernelSide; ++kx) {
          const double k = kernel.w(o, i, ky, kx);
          // Output rows r with 0 <= r + ky - 1 < H.
          const size_t r0 = ky == 0 ? 1 : 0;
          const size_t r1 = ky == 2 ? H - 1 : H;
          const size_t s0 = kx == 0 ? 1 : 0;
          const size_t s1 = kx == 2 ? W - 1 : W;
          for (size_t r = r0; r < r1; ++r) {
            const double* srow = src + (r + ky - 1) * W + kx;
            double* drow = dst + r * W;
            for (size_t s = s0; s < s1; ++s) drow[s] += k * srow[s - 1];
          }
        }
      }
    }
  }
  return out;
}

Conv2dGrads Conv2dBackward(const Tensor& input, const Kernel& kernel,
                           const Tensor& grad_output) {
  const Shape in = input.shape();
  const Shape go = grad_output.shape();
  if (in.c != kernel.in_channels || go.c != kernel.out_channels ||
      go.h != in.h || go.w != in.w) {
    throw ShapeMismatchError("conv backward: input " + ToString(in) +
                             ", grad " + ToString(go));
  }
  const size_t H = in.h, W = in.w;
  Conv2dGrads g{Tensor(in), std::vector<double>(kernel.weights.size(), 0.0),
                std::vector<double>(kernel.out_channels, 0.0)};
  for (size_t o = 0; o < kernel.out_channels; ++o) {
    const double* gout = &grad_output.at(o, 0, 0);
    double bsum = 0.0;
    for (size_t p = 0; p < H * W; ++p) bsum += gout[p];
    g.bias[o] = bsum;
    for (size_t i = 0; i < in.c; ++i) {
      const double* src = &input.at(i, 0, 0);
      double* gin = &g.input.at(i, 0, 0);
      for (size_t ky = 0; ky < kKernelSide; ++ky) {
        for (size_t kx = 0; kx < kKernelSide; ++kx) {
          const double k = kernel.w(o, i, ky, kx);
          const size_t r0 = ky == 0 ? 1 : 0;
          const size_t r1 = ky == 2 ? H - 1 : H;
          const size_t s0 = kx == 0 ? 1 : 0;
          const size_t s1 = kx == 2 ? W - 1 : W;
          double wsum = 0.0;
          for (size_t r = r0; r < r1; ++r) {
            const size_t off = (r + ky - 1) * W + kx;
            const double* srow = src + off;
            double* girow = gin + off;
            const double* grow = gout + r * W;
            for (size_t s = s0; s < s1; ++s) {
              wsum += grow[s] * srow[s - 1];
              girow[s - 1] += grow[s] * k;
            }
          }
          g.weights[((o * in.c + i) * kKernelSide + ky) * kKernelSide + kx] =
              wsum;
        }
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

std::string ToString(PoolMode m) {
  return m == PoolMode::kMax ? "max" : "stochastic";
}

std::vector<double> StochasticProbabilities(std::span<const double> window) {
  std::vector<double> p(window.size());
  double sum = 0.0;
  for (double a : window) sum += a;
  if (sum > 0.0) {
    for (size_t i = 0; i < window.size(); ++i) p[i] = window[i] / sum;
  } else {
    std::fill(p.begin(), p.end(), 1.0 / window.size());
  }
  return p;
}

namespace {

Shape PooledShape(const Shape& in) { return {in.c, in.h / 2, in.w / 2}; }

void CheckPoolInput(const Shape& in) {
  if (in.h < 2 || in.w < 2) {
    throw ShapeError("2x2 pooling needs height and width >= 2, got " +
                     ToString(in));
  }
}

}  // namespace

PoolForwardResult PoolForward(const Tensor& input, PoolMode mode, Phase phase,
                              Rng* rng) {
  const Shape in = input.shape();
  CheckPoolInput(in);
  const Shape os = PooledShape(in);
  PoolForwardResult res{Tensor(os), {}};
  const bool routed = mode == PoolMode::kMax || phase == Phase::kTrain;
  if (routed) res.route.resize(os.size());
  if (mode == PoolMode::kStochastic && phase == Phase::kTrain && !rng) {
    throw std::invalid_argument("stochastic pooling in training needs an Rng");
  }

  size_t out_idx = 0;
  for (size_t c = 0; c < os.c; ++c) {
    for (size_t y = 0; y < os.h; ++y) {
      for (size_t x = 0; x < os.w; ++x, ++out_idx) {
        // Window in row-major order.
        const size_t idx[4] = {
            (c * in.h + 2 * y) * in.w + 2 * x,
            (c * in.h + 2 * y) * in.w + 2 * x + 1,
            (c * in.h + 2 * y + 1) * in.w + 2 * x,
            (c * in.h + 2 * y + 1) * in.w + 2 * x + 1,
        };
        const double a[4] = {input[idx[0]], input[idx[1]], input[idx[2]],
                             input[idx[3]]};
        if (mode == PoolMode::kMax) {
          size_t best = 0;
          for (size_t k = 1; k < 4; ++k) {
            if (a[k] > a[best]) best = k;
          }
          res.output[out_idx] = a[best];
          res.route[out_idx] = idx[best];
          continue;
        }
        for (double v : a) {
          if (v < 0.0) {
            throw NegativeActivationError(
                "stochastic pooling input must be non-negative, got " +
                std::to_string(v));
          }
        }
        const auto p = StochasticProbabilities(a);
        if (phase == Phase::kInfer) {
          double s = 0.0;
          for (size_t k = 0; k < 4; ++k) s += p[k] * a[k];
          res.output[out_idx] = s;
        } else {
          const double u = rng->Uniform();
          double cum = 0.0;
          size_t pick = 3;
          for (size_t k = 0; k < 4; ++k) {
            cum += p[k];
            if (u < cum) {
              pick = k;
              break;
            }
          }
          // Never pick a zero-probability element through rounding slack.
          while (p[pick] == 0.0 && pick > 0) --pick;
          res.output[out_idx] = a[pick];
          res.route[out_idx] = idx[pick];
        }
      }
    }
  }
  return res;
}

Tensor PoolBackward(const Tensor& input, const PoolForwardResult& forward,
                    PoolMode mode, Phase phase, const Tensor& grad_output) {
  const Shape in = input.shape();
  if (grad_output.shape() != PooledShape(in)) {
    throw ShapeMismatchError("pool backward: grad " +
                             ToString(grad_output.shape()) + " for input " +
                             ToString(in));
  }
  Tensor grad(in);
  if (mode == PoolMode::kMax || phase == Phase::kTrain) {
    for (size_t o = 0; o < grad_output.size(); ++o) {
      grad[forward.route[o]] += grad_output[o];
    }
    return grad;
  }
  const Shape os = grad_output.shape();
  size_t out_idx = 0;
  for (size_t c = 0; c < os.c; ++c) {
    for (size_t y = 0; y < os.h; ++y) {
      for (size_t x = 0; x < os.w; ++x, ++out_idx) {
        const size_t idx[4] = {
            (c * in.h + 2 * y) * in.w + 2 * x,
            (c * in.h + 2 * y) * in.w + 2 * x + 1,
            (c * in.h + 2 * y + 1) * in.w + 2 * x,
            (c * in.h + 2 * y + 1) * in.w + 2 * x + 1,
        };
        double sum = 0.0, sq = 0.0;
        for (size_t k : idx) {
          sum += input[k];
          sq += input[k] * input[k];
        }
        const double g = grad_output[out_idx];
        for (size_t k : idx) {
          // d/da_k (sum a^2 / sum a) = (2 a_k S - Q) / S^2
          const double d =
              sum > 0.0 ? (2.0 * input[k] * sum - sq) / (sum * sum) : 0.25;
          grad[k] += g * d;
        }
      }
    }
  }
  return grad;
}

// ---------------------------------------------------------------------------

Tensor DenseForward(const Tensor& x, std::span<const double> weights,
                    std::span<const double> bias) {
  const size_t in = x.size();
  const size_t out = bias.size();
  if (weights.size() != in * out) {
    throw ShapeMismatchError("dense: " + std::to_string(weights.size()) +
                             " weights for " + std::to_string(in) + " -> " +
                             std::to_string(out));
  }
  std::vector<double> y(out);
  const double* xp = x.data().data();
  for (size_t o = 0; o < out; ++o) {
    const double* wr = weights.data() + o * in;
    double s = bias[o];
    for (size_t i = 0; i < in; ++i) s += wr[i] * xp[i];
    y[o] = s;
  }
  return Tensor::Vector(std::move(y));
}

DenseGrads DenseBackward(const Tensor& x, std::span<const double> weights,
                         const Tensor& grad_output) {
  const size_t in = x.size();
  const size_t out = grad_output.size();
  if (weights.size() != in * out) {
    throw ShapeMismatchError("dense backward: " +
                             std::to_string(weights.size()) + " weights for " +
                             std::to_string(in) + " -> " + std::to_string(out));
  }
  DenseGrads g{Tensor(x.shape()), std::vector<double>(in * out),
               std::vector<double>(grad_output.vec())};
  const double* xp = x.data().data();
  double* gi = g.input.data().data();
  for (size_t o = 0; o < out; ++o) {
    const double go = grad_output[o];
    const double* wr = weights.data() + o * in;
    double* gw = g.weights.data() + o * in;
    for (size_t i = 0; i < in; ++i) {
      gw[i] = go * xp[i];
      gi[i] += go * wr[i];
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> p(logits.size());
  if (logits.empty()) return p;
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

LossResult SoftmaxCrossEntropy(const Tensor& logits, int target) {
  const size_t n = logits.size();
  if (n < 2) throw ShapeMismatchError("softmax needs at least 2 logits");
  if (target < 0 || static_cast<size_t>(target) >= n) {
    throw TargetOutOfRangeError("target " + std::to_string(target) +
                                " outside [0, " + std::to_string(n) + ")");
  }
  const auto l = logits.data();
  const double m = *std::max_element(l.begin(), l.end());
  double z = 0.0;
  for (double v : l) z += std::exp(v - m);
  const double log_z = std::log(z);
  LossResult r{log_z - (l[target] - m), Tensor(logits.shape())};
  for (size_t i = 0; i < n; ++i) r.gradient[i] = std::exp(l[i] - m - log_z);
  r.gradient[target] -= 1.0;
  return r;
}

// ---------------------------------------------------------------------------

void Validate(const SgdConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ConfigError("learning rate must be positive");
  }
  if (!(config.momentum >= 0.0 && config.momentum < 1.0)) {
    throw ConfigError("momentum must lie in [0, 1)");
  }
  if (config.batch_size == 0) throw ConfigError("batch size must be positive");
}

void SgdStep(std::span<double> params, std::span<const double> grads,
             std::span<double> velocity, double learning_rate,
             double momentum) {
  if (params.size() != grads.size() || params.size() != velocity.size()) {
    throw ShapeMismatchError("sgd: " + std::to_string(params.size()) +
                             " params, " + std::to_string(grads.size()) +
                             " grads, " + std::to_string(velocity.size()) +
                             " velocity");
  }
  for (size_t i = 0; i < params.size(); ++i) {
    velocity[i] = momentum * velocity[i] - learning_rate * grads[i];
    params[i] += velocity[i];
  }
}

// ---------------------------------------------------------------------------

std::string ToString(LayerKind k) {
  switch (k) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kStochasticPool: return "stochasticpool";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kFlatten: return "flatten";
    case LayerKind::kDense: return "dense";
    case LayerKind::kDropout: return "dropout";
    case LayerKind::kSoftmax: return "softmax";
  }
  return "?";
}

namespace {

class ConvLayer final : public Layer {
 public:
  ConvLayer(size_t filters, size_t in_channels) : kernel_(filters, in_channels) {
    params_.assign(kernel_.weights.size() + kernel_.bias.size(), 0.0);
    grads_.assign(params_.size(), 0.0);
  }

  LayerSpec spec() const override { return LayerSpec::Conv2d(kernel_.out_channels); }

  Shape OutputShape(const Shape& in) const override {
    if (in.c != kernel_.in_channels || in.h == 0 || in.w == 0) {
      throw ShapeChainError("conv2d cannot take input " + ToString(in));
    }
    return {kernel_.out_channels, in.h, in.w};
  }

  Tensor Forward(const Tensor& x, const ForwardContext&) override {
    SyncKernel();
    input_ = x;
    return Conv2dForward(x, kernel_);
  }

  Tensor Backward(const Tensor& grad_output) override {
    auto g = Conv2dBackward(input_, kernel_, grad_output);
    const size_t nw = g.weights.size();
    for (size_t i = 0; i < nw; ++i) grads_[i] += g.weights[i];
    for (size_t i = 0; i < g.bias.size(); ++i) grads_[nw + i] += g.bias[i];
    return std::move(g.input);
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<ConvLayer>(*this);
  }

 private:
  // params_ holds [weights..., bias...]; the Kernel view is refreshed before
  // use because optimizers update params_ in place.
  void SyncKernel() {
    const size_t nw = kernel_.weights.size();
    std::copy(params_.begin(), params_.begin() + nw, kernel_.weights.begin());
    std::copy(params_.begin() + nw, params_.end(), kernel_.bias.begin());
  }

  Kernel kernel_;
  Tensor input_;
};

class PoolLayer final : public Layer {
 public:
  explicit PoolLayer(PoolMode mode) : mode_(mode) {}

  LayerSpec spec() const override { return LayerSpec::Pool(mode_); }

  Shape OutputShape(const Shape& in) const override {
    if (in.h < 2 || in.w < 2) {
      throw ShapeChainError(ToString(mode_) + " pool cannot take input " +
                            ToString(in));
    }
    return PooledShape(in);
  }

  Tensor Forward(const Tensor& x, const ForwardContext& ctx) override {
    input_ = x;
    phase_ = ctx.phase;
    forward_ = PoolForward(x, mode_, ctx.phase, ctx.rng);
    return forward_.output;
  }

  Tensor Backward(const Tensor& grad_output) override {
    return PoolBackward(input_, forward_, mode_, phase_, grad_output);
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<PoolLayer>(*this);
  }

 private:
  PoolMode mode_;
  Phase phase_ = Phase::kInfer;
  Tensor input_;
  PoolForwardResult forward_;
};

class ReluLayer final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::Relu(); }
  Shape OutputShape(const Shape& in) const override { return in; }

  Tensor Forward(const Tensor& x, const ForwardContext&) override {
    Tensor y = x;
    mask_.assign(x.size(), 0);
    for (size_t i = 0; i < y.size(); ++i) {
      if (y[i] > 0.0) {
        mask_[i] = 1;
      } else {
        y[i] = 0.0;
      }
    }
    return y;
  }

  Tensor Backward(const Tensor& grad_output) override {
    Tensor g = grad_output;
    for (size_t i = 0; i < g.size(); ++i) {
      if (!mask_[i]) g[i] = 0.0;
    }
    return g;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<ReluLayer>(*this);
  }

 private:
  std::vector<uint8_t> mask_;
};

class FlattenLayer final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::Flatten(); }
  Shape OutputShape(const Shape& in) const override { return {in.size(), 1, 1}; }

  Tensor Forward(const Tensor& x, const ForwardContext&) override {
    in_shape_ = x.shape();
    return x.Reshaped(Shape{x.size(), 1, 1});
  }

  Tensor Backward(const Tensor& grad_output) override {
    return grad_output.Reshaped(in_shape_);
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<FlattenLayer>(*this);
  }

 private:
  Shape in_shape_;
};

class DenseLayer final : public Layer {
 public:
  DenseLayer(size_t units, size_t in) : units_(units), in_(in) {
    params_.assign(units * in + units, 0.0);
    grads_.assign(params_.size(), 0.0);
  }

  LayerSpec spec() const override { return LayerSpec::Dense(units_); }

  Shape OutputShape(const Shape& in) const override {
    if (in.size() != in_ || in.h != 1 || in.w != 1) {
      throw ShapeChainError("dense layer expecting " + std::to_string(in_) +
                            " inputs cannot take " + ToString(in));
    }
    return {units_, 1, 1};
  }

  Tensor Forward(const Tensor& x, const ForwardContext&) override {
    input_ = x;
    return DenseForward(x, weights(), bias());
  }

  Tensor Backward(const Tensor& grad_output) override {
    auto g = DenseBackward(input_, weights(), grad_output);
    const size_t nw = g.weights.size();
    for (size_t i = 0; i < nw; ++i) grads_[i] += g.weights[i];
    for (size_t i = 0; i < units_; ++i) grads_[nw + i] += g.bias[i];
    return std::move(g.input);
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<DenseLayer>(*this);
  }

 private:
  std::span<const double> weights() const {
    return std::span<const double>(params_).first(units_ * in_);
  }
  std::span<const double> bias() const {
    return std::span<const double>(params_).subspan(units_ * in_);
  }

  size_t units_;
  size_t in_;
  Tensor input_;
};

class DropoutLayer final : public Layer {
 public:
  explicit DropoutLayer(double rate) : rate_(rate) {}

  LayerSpec spec() const override { return LayerSpec::Dropout(rate_); }
  Shape OutputShape(const Shape& in) const override { return in; }

  // Inverted dropout: kept units are scaled by 1/(1-rate) during training so
  // inference is the identity.
  Tensor Forward(const Tensor& x, const ForwardContext& ctx) override {
    active_ = ctx.phase == Phase::kTrain && rate_ > 0.0;
    if (!active_) return x;
    if (!ctx.rng) throw std::invalid_argument("dropout in training needs an Rng");
    const double scale = 1.0 / (1.0 - rate_);
    scale_.resize(x.size());
    Tensor y = x;
    for (size_t i = 0; i < y.size(); ++i) {
      scale_[i] = ctx.rng->Uniform() < rate_ ? 0.0 : scale;
      y[i] *= scale_[i];
    }
    return y;
  }

  Tensor Backward(const Tensor& grad_output) override {
    if (!active_) return grad_output;
    Tensor g = grad_output;
    for (size_t i = 0; i < g.size(); ++i) g[i] *= scale_[i];
    return g;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<DropoutLayer>(*this);
  }

 private:
  double rate_;
  bool active_ = false;
  std::vector<double> scale_;
};

class SoftmaxLayer final : public Layer {
 public:
  LayerSpec spec() const override { return LayerSpec::Softmax(); }

  Shape OutputShape(const Shape& in) const override {
    if (in.size() < 2) throw ShapeChainError("softmax needs >= 2 inputs");
    return in;
  }

  Tensor Forward(const Tensor& x, const ForwardContext&) override {
    output_ = Tensor(x.shape(), Softmax(x.data()));
    return output_;
  }

  // dL/dx_i = p_i (g_i - sum_j g_j p_j)
  Tensor Backward(const Tensor& grad_output) override {
    double dot = 0.0;
    for (size_t i = 0; i < output_.size(); ++i) dot += grad_output[i] * output_[i];
    Tensor g(output_.shape());
    for (size_t i = 0; i < g.size(); ++i) {
      g[i] = output_[i] * (grad_output[i] - dot);
    }
    return g;
  }

  std::unique_ptr<Layer> Clone() const override {
    return std::make_unique<SoftmaxLayer>(*this);
  }

 private:
  Tensor output_;
};

}  // namespace

std::unique_ptr<Layer> MakeLayer(const LayerSpec& spec, const Shape& in) {
  std::unique_ptr<Layer> layer;
  switch (spec.kind) {
    case LayerKind::kConv2d:
      if (spec.units == 0) throw ShapeChainError("conv2d needs >= 1 filter");
      layer = std::make_unique<ConvLayer>(spec.units, in.c);
      break;
    case LayerKind::kMaxPool:
      layer = std::make_unique<PoolLayer>(PoolMode::kMax);
      break;
    case LayerKind::kStochasticPool:
      layer = std::make_unique<PoolLayer>(PoolMode::kStochastic);
      break;
    case LayerKind::kRelu:
      layer = std::make_unique<ReluLayer>();
      break;
    case LayerKind::kFlatten:
      layer = std::make_unique<FlattenLayer>();
      break;
    case LayerKind::kDense:
      if (spec.units == 0) throw ShapeChainError("dense needs >= 1 unit");
      layer = std::make_unique<DenseLayer>(spec.units, in.size());
      break;
    case LayerKind::kDropout:
      if (!(spec.rate >= 0.0 && spec.rate < 1.0)) {
        throw ShapeChainError("dropout rate must lie in [0, 1)");
      }
      layer = std::make_unique<DropoutLayer>(spec.rate);
      break;
    case LayerKind::kSoftmax:
      layer = std::make_unique<SoftmaxLayer>();
      break;
    default:
      throw ShapeChainError("unknown layer kind " +
                            std::to_string(static_cast<uint32_t>(spec.kind)));
  }
  return layer;
}

Network::Network(const Network& other)
    : input_shape_(other.input_shape_), shapes_(other.shapes_) {
  layers_.reserve(other.layers_.size());
  for (const auto& l : other.layers_) layers_.push_back(l->Clone());
}

Network& Network::operator=(const Network& other) {
  if (this != &other) {
    Network copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Network Network::Build(const Shape& input, const std::vector<LayerSpec>& specs) {
  Network net;
  net.input_shape_ = input;
  net.shapes_.push_back(input);
  Shape cur = input;
  for (size_t i = 0; i < specs.size(); ++i) {
    try {
      auto layer = MakeLayer(specs[i], cur);
      cur = layer->OutputShape(cur);
      net.layers_.push_back(std::move(layer));
    } catch (const ShapeChainError& e) {
      throw ShapeChainError("layer " + std::to_string(i) + " (" +
                            ToString(specs[i].kind) + "): " + e.detail());
    }
    if (cur.size() == 0) {
      throw ShapeChainError("layer " + std::to_string(i) + " (" +
                            ToString(specs[i].kind) + ") produces empty " +
                            ToString(cur));
    }
    net.shapes_.push_back(cur);
  }
  return net;
}

void Network::InitializeHeUniform(Rng& rng) {
  for (size_t i = 0; i < layers_.size(); ++i) {
    auto& l = *layers_[i];
    const LayerSpec s = l.spec();
    size_t fan_in = 0, n_weights = 0;
    if (s.kind == LayerKind::kConv2d) {
      fan_in = shapes_[i].c * kKernelArea;
      n_weights = s.units * fan_in;
    } else if (s.kind == LayerKind::kDense) {
      fan_in = shapes_[i].size();
      n_weights = s.units * fan_in;
    } else {
      continue;
    }
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    auto p = l.params();
    for (size_t k = 0; k < n_weights; ++k) p[k] = rng.Uniform(-limit, limit);
    for (size_t k = n_weights; k < p.size(); ++k) p[k] = 0.0;
  }
}

size_t Network::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers_) n += l->params().size();
  return n;
}

void Network::ZeroGrads() {
  for (auto& l : layers_) {
    auto g = l->grads();
    std::fill(g.begin(), g.end(), 0.0);
  }
}

Tensor Network::Forward(const Tensor& x, Phase phase, std::span<Rng> rngs,
                        size_t end) {
  if (x.shape() != input_shape_) {
    throw ShapeMismatchError("network input " + ToString(x.shape()) +
                             ", expected " + ToString(input_shape_));
  }
  end = std::min(end, layers_.size());
  Tensor cur = x;
  for (size_t i = 0; i < end; ++i) {
    ForwardContext ctx{phase, rngs.empty() ? nullptr : &rngs[i]};
    cur = layers_[i]->Forward(cur, ctx);
  }
  return cur;
}

Tensor Network::Backward(const Tensor& grad, size_t end) {
  end = std::min(end, layers_.size());
  Tensor cur = grad;
  for (size_t i = end; i-- > 0;) cur = layers_[i]->Backward(cur);
  return cur;
}

size_t Network::logits_end() const {
  size_t end = layers_.size();
  if (end > 0 && layers_[end - 1]->spec().kind == LayerKind::kSoftmax) --end;
  return end;
}

Network::SampleResult Network::AccumulateGradients(const Tensor& x, int target,
                                                   Phase phase,
                                                   std::span<Rng> rngs) {
  const size_t end = logits_end();
  const Tensor logits = Forward(x, phase, rngs, end);
  LossResult lr = SoftmaxCrossEntropy(logits, target);
  Backward(lr.gradient, end);
  return {lr.loss, Softmax(logits.data())};
}

double Network::Loss(const Tensor& x, int target) {
  const Tensor logits = Forward(x, Phase::kInfer, {}, logits_end());
  return SoftmaxCrossEntropy(logits, target).loss;
}

bool operator==(const Network& a, const Network& b) {
  if (a.input_shape_ != b.input_shape_ || a.layers_.size() != b.layers_.size()) {
    return false;
  }
  for (size_t i = 0; i < a.layers_.size(); ++i) {
    if (!(a.layers_[i]->spec() == b.layers_[i]->spec())) return false;
    auto pa = a.layers_[i]->params();
    auto pb = b.layers_[i]->params();
    if (pa.size() != pb.size() ||
        !std::equal(pa.begin(), pa.end(), pb.begin(), [](double x, double y) {
          return std::bit_cast<uint64_t>(x) == std::bit_cast<uint64_t>(y);
        })) {
      return false;
    }
  }
  return true;
}

double GradCheck(Network& network, const Tensor& input, int target,
                 double epsilon) {
  network.ZeroGrads();
  network.AccumulateGradients(input, target, Phase::kInfer);
  double worst = 0.0;
  for (size_t li = 0; li < network.layer_count(); ++li) {
    auto& layer = network.layer(li);
    auto params = layer.params();
    const std::vector<double> analytic(layer.grads().begin(),
                                       layer.grads().end());
    for (size_t k = 0; k < params.size(); ++k) {
      const double saved = params[k];
      params[k] = saved + epsilon;
      const double up = network.Loss(input, target);
      params[k] = saved - epsilon;
      const double down = network.Loss(input, target);
      params[k] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double denom =
          std::max({std::abs(analytic[k]), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic[k] - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace nids::nn
