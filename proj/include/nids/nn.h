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

// Dense-tensor neural network kernels with hand-derived backward passes.
//
// Convolutions are 3x3, stride 1, zero-padded so the output keeps the input's
// height and width:
//
//   Y[o, r, s] = B[o] + sum_i sum_{u,v in -1..1} K[o, i, u, v] X[i, r+u, s+v]
//
// Pooling windows are 2x2 with stride 2; a trailing odd row or column is
// dropped. Stochastic pooling draws one window element with probability
// proportional to its (non-negative) activation while training and outputs
// the probability-weighted mean sum_i p_i a_i at inference.

#ifndef NIDS_NN_H_
#define NIDS_NN_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "nids/rng.h"

namespace nids::nn {

struct Shape {
  size_t c = 1;
  size_t h = 1;
  size_t w = 1;

  size_t size() const { return c * h * w; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

std::string ToString(const Shape& s);

/// Row-major (channel, row, column) array. A vector is Shape{n, 1, 1}.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0)
      : shape_(shape), data_(shape.size(), fill) {}
  /// Throws ShapeMismatchError when data.size() != shape.size().
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Vector(std::vector<double> data) {
    const size_t n = data.size();
    return Tensor(Shape{n, 1, 1}, std::move(data));
  }

  const Shape& shape() const { return shape_; }
  size_t size() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double& at(size_t c, size_t y, size_t x) {
    return data_[(c * shape_.h + y) * shape_.w + x];
  }
  const double& at(size_t c, size_t y, size_t x) const {
    return data_[(c * shape_.h + y) * shape_.w + x];
  }

  /// Same data, new shape of equal size.
  Tensor Reshaped(Shape shape) const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_{0, 0, 0};
  std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Convolution

inline constexpr size_t kKernelSide = 3;
inline constexpr size_t kKernelArea = kKernelSide * kKernelSide;

struct Kernel {
  size_t out_channels = 0;
  size_t in_channels = 0;
  /// (out, in, 3, 3) row-major; index [.., .., u+1, v+1] holds K_{u,v}.
  std::vector<double> weights;
  std::vector<double> bias;

  Kernel() = default;
  Kernel(size_t out, size_t in)
      : out_channels(out),
        in_channels(in),
        weights(out * in * kKernelArea, 0.0),
        bias(out, 0.0) {}

  double& w(size_t o, size_t i, size_t ky, size_t kx) {
    return weights[((o * in_channels + i) * kKernelSide + ky) * kKernelSide +
                   kx];
  }
  double w(size_t o, size_t i, size_t ky, size_t kx) const {
    return weights[((o * in_channels + i) * kKernelSide + ky) * kKernelSide +
                   kx];
  }
};

/// Throws ShapeMismatchError on channel mismatch or empty spatial dims.
Tensor Conv2dForward(const Tensor& input, const Kernel& kernel);

struct Conv2dGrads {
  Tensor input;
  std::vector<double> weights;
  std::vector<double> bias;
};

Conv2dGrads Conv2dBackward(const Tensor& input, const Kernel& kernel,
                           const Tensor& grad_output);

// ---------------------------------------------------------------------------
// Pooling

enum class PoolMode { kMax, kStochastic };
enum class Phase { kTrain, kInfer };

std::string ToString(PoolMode m);

/// p_i = a_i / sum_j a_j, uniform when the sum is zero.
std::vector<double> StochasticProbabilities(std::span<const double> window);

struct PoolForwardResult {
  Tensor output;
  /// Flat input index that produced each output (Max, Stochastic/Train).
  std::vector<size_t> route;
};

/// Throws ShapeError when height or width < 2, NegativeActivationError for a
/// negative input in stochastic mode, and std::invalid_argument when
/// stochastic training is requested without an Rng.
PoolForwardResult PoolForward(const Tensor& input, PoolMode mode, Phase phase,
                              Rng* rng);

/// Gradient with respect to the pool input. Max and stochastic/train route
/// the output gradient to the recorded position; stochastic/infer uses the
/// derivative of sum a_i^2 / sum a_j (1/n per element for an all-zero
/// window).
Tensor PoolBackward(const Tensor& input, const PoolForwardResult& forward,
                    PoolMode mode, Phase phase, const Tensor& grad_output);

// ---------------------------------------------------------------------------
// Dense

/// y = W x + b with W (out x in) row-major. Throws ShapeMismatchError.
Tensor DenseForward(const Tensor& x, std::span<const double> weights,
                    std::span<const double> bias);

struct DenseGrads {
  Tensor input;
  std::vector<double> weights;
  std::vector<double> bias;
};

DenseGrads DenseBackward(const Tensor& x, std::span<const double> weights,
                         const Tensor& grad_output);

// ---------------------------------------------------------------------------
// Losses

std::vector<double> Softmax(std::span<const double> logits);

struct LossResult {
  double loss = 0.0;
  Tensor gradient;  // with respect to the logits
};

/// Max-subtracted softmax; loss = -log p_target, gradient = p - onehot.
/// Throws TargetOutOfRangeError.
LossResult SoftmaxCrossEntropy(const Tensor& logits, int target);

// ---------------------------------------------------------------------------
// Optimizer

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  size_t batch_size = 128;
  size_t epochs = 10;
  uint64_t seed = 0;
};

/// Validates ranges; throws ConfigError.
void Validate(const SgdConfig& config);

/// v <- momentum*v - lr*g; p <- p + v. Throws ShapeMismatchError.
void SgdStep(std::span<double> params, std::span<const double> grads,
             std::span<double> velocity, double learning_rate, double momentum);

// ---------------------------------------------------------------------------
// Layer stack

enum class LayerKind : uint32_t {
  kConv2d = 1,
  kMaxPool = 2,
  kStochasticPool = 3,
  kRelu = 4,
  kFlatten = 5,
  kDense = 6,
  kDropout = 7,
  kSoftmax = 8,
};

std::string ToString(LayerKind k);

struct LayerSpec {
  LayerKind kind = LayerKind::kRelu;
  /// Filters for Conv2d, output units for Dense.
  size_t units = 0;
  /// Dropout rate in [0, 1).
  double rate = 0.0;

  static LayerSpec Conv2d(size_t filters) { return {LayerKind::kConv2d, filters, 0}; }
  static LayerSpec Pool(PoolMode m) {
    return {m == PoolMode::kMax ? LayerKind::kMaxPool
                                : LayerKind::kStochasticPool,
            0, 0};
  }
  static LayerSpec Relu() { return {LayerKind::kRelu, 0, 0}; }
  static LayerSpec Flatten() { return {LayerKind::kFlatten, 0, 0}; }
  static LayerSpec Dense(size_t units) { return {LayerKind::kDense, units, 0}; }
  static LayerSpec Dropout(double rate) { return {LayerKind::kDropout, 0, rate}; }
  static LayerSpec Softmax() { return {LayerKind::kSoftmax, 0, 0}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

struct ForwardContext {
  Phase phase = Phase::kInfer;
  /// Required by stochastic pooling and dropout in the training phase.
  Rng* rng = nullptr;
};

/// One stage of a sequential network. Forward caches what Backward needs, so
/// a layer instance handles one sample at a time.
class Layer {
 public:
  virtual ~Layer() = default;

  virtual LayerSpec spec() const = 0;
  /// Throws ShapeChainError when the input shape is not acceptable.
  virtual Shape OutputShape(const Shape& in) const = 0;
  virtual Tensor Forward(const Tensor& x, const ForwardContext& ctx) = 0;
  /// Returns the input gradient and accumulates parameter gradients.
  virtual Tensor Backward(const Tensor& grad_output) = 0;
  virtual std::unique_ptr<Layer> Clone() const = 0;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::span<double> grads() { return grads_; }
  std::span<const double> grads() const { return grads_; }

 protected:
  std::vector<double> params_;
  std::vector<double> grads_;
};

/// Creates a layer for input shape `in`; parameters are zero.
std::unique_ptr<Layer> MakeLayer(const LayerSpec& spec, const Shape& in);

class Network {
 public:
  Network() = default;
  Network(const Network& other);
  Network& operator=(const Network& other);
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  /// Validates the shape chain (ShapeChainError naming the layer) and creates
  /// zero-initialized layers.
  static Network Build(const Shape& input, const std::vector<LayerSpec>& specs);

  /// He-uniform weights, U(-sqrt(6/fan_in), +sqrt(6/fan_in)), zero biases.
  void InitializeHeUniform(Rng& rng);

  const Shape& input_shape() const { return input_shape_; }
  size_t layer_count() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_[i]; }
  const Layer& layer(size_t i) const { return *layers_[i]; }
  /// Shape entering layer i; index layer_count() is the network output.
  const Shape& shape_at(size_t i) const { return shapes_[i]; }

  size_t parameter_count() const;
  void ZeroGrads();

  /// Runs layers [0, end). `rngs`, when non-empty, holds one stream per layer.
  Tensor Forward(const Tensor& x, Phase phase, std::span<Rng> rngs = {},
                 size_t end = SIZE_MAX);

  /// Propagates from the output of layer end-1 down to the input.
  Tensor Backward(const Tensor& grad, size_t end = SIZE_MAX);

  /// Index one past the last layer that produces logits (a trailing Softmax
  /// is excluded).
  size_t logits_end() const;

  struct SampleResult {
    double loss = 0.0;
    std::vector<double> probabilities;
  };

  /// Forward to logits, softmax cross-entropy, backward; parameter gradients
  /// are accumulated (not zeroed).
  SampleResult AccumulateGradients(const Tensor& x, int target, Phase phase,
                                   std::span<Rng> rngs = {});

  /// Cross-entropy loss in the inference phase, no gradients.
  double Loss(const Tensor& x, int target);

  friend bool operator==(const Network& a, const Network& b);

 private:
  Shape input_shape_;
  std::vector<Shape> shapes_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Compares analytic parameter gradients of the inference-phase
/// cross-entropy loss with central differences. Returns
/// max |ga - gn| / max(|ga|, |gn|, 1e-8) over all parameters.
double GradCheck(Network& network, const Tensor& input, int target,
                 double epsilon);

}  // namespace nids::nn

#endif  // NIDS_NN_H_
