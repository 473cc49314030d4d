#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ahcr/layers.hpp"
#include "ahcr/rng.hpp"
#include "ahcr/tensor.hpp"

namespace ahcr {

inline constexpr Index kInputSide = 64;

struct ModelConfig {
  std::array<Index, 3> widths{128, 256, 512};
  Index classes = 28;
  Index feature_dim = 1024;
  double dropout_rate = 0.5;
  std::uint64_t seed = 1;
};

// The recognition network: three 7x7 conv + ReLU + pool stages, a hidden
// dense layer whose activations are the penultimate features, dropout, and
// the class logits layer. Velocity buffers live next to their parameters.
template <typename T>
class Model {
 public:
  explicit Model(const ModelConfig& cfg) : config_(cfg), dropout_rng_(0) {
    for (Index wd : cfg.widths)
      if (wd < 1) throw InputError("channel widths must be positive");
    if (cfg.classes < 2) throw InputError("need at least two classes");
    if (cfg.feature_dim < 1) throw InputError("feature_dim must be positive");
    if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
      throw InputError("dropout_rate must be in [0,1)");

    conv1 = make_conv_layer<T>(cfg.widths[0], 1);
    conv2 = make_conv_layer<T>(cfg.widths[1], cfg.widths[0]);
    conv3 = make_conv_layer<T>(cfg.widths[2], cfg.widths[1]);

    // 64 -> pool 32 -> pool 16 -> pool 8
    Index side = kInputSide;
    for (int stage = 0; stage < 3; ++stage)
      side = conv_out_dim(side, pool.window, pool.stride, pool.pad);
    if (side != 8)
      throw ShapeError("pooling chain does not reduce 64 to 8");
    fc1 = make_dense_layer<T>(cfg.feature_dim, cfg.widths[2] * side * side);
    fc2 = make_dense_layer<T>(cfg.classes, cfg.feature_dim);

    Rng init_rng(mix_seed(cfg.seed, 0x1417));
    he_init(conv1.weights, conv1.in_channels() * 49, init_rng);
    he_init(conv2.weights, conv2.in_channels() * 49, init_rng);
    he_init(conv3.weights, conv3.in_channels() * 49, init_rng);
    he_init(fc1.weights, fc1.weights.dim(1), init_rng);
    he_init(fc2.weights, fc2.weights.dim(1), init_rng);

    dropout_rng_ = Rng(mix_seed(cfg.seed, 0xD209));
    for (auto& ref : param_tensors())
      velocity_.push_back(Tensor<T>::zeros(ref.tensor->shape()));
  }

  struct ParamRef {
    std::string name;
    Tensor<T>* tensor;
    bool is_bias;
  };

  std::vector<ParamRef> param_tensors() {
    return {{"conv1.weight", &conv1.weights, false},
            {"conv1.bias", &conv1.bias, true},
            {"conv2.weight", &conv2.weights, false},
            {"conv2.bias", &conv2.bias, true},
            {"conv3.weight", &conv3.weights, false},
            {"conv3.bias", &conv3.bias, true},
            {"fc1.weight", &fc1.weights, false},
            {"fc1.bias", &fc1.bias, true},
            {"fc2.weight", &fc2.weights, false},
            {"fc2.bias", &fc2.bias, true}};
  }

  Tensor<T>& velocity(std::size_t param_index) { return velocity_[param_index]; }
  std::size_t param_count() const { return velocity_.size(); }

  const ModelConfig& config() const { return config_; }
  Rng& dropout_rng() { return dropout_rng_; }

  ConvLayer<T> conv1, conv2, conv3;
  DenseLayer<T> fc1, fc2;
  PoolSpec pool;

 private:
  static void he_init(Tensor<T>& weights, Index fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (Index i = 0; i < weights.size(); ++i)
      weights[i] = static_cast<T>(rng.normal(0.0, std));
  }

  ModelConfig config_;
  std::vector<Tensor<T>> velocity_;
  Rng dropout_rng_;
};

template <typename T>
struct ModelCaches {
  ConvCache<T> conv1, conv2, conv3;
  ReluCache<T> relu1, relu2, relu3, relu4;
  PoolCache<T> pool1, pool2, pool3;
  DenseCache<T> fc1, fc2;
  DropoutCache<T> dropout;
  Shape pre_flatten_shape;
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;    // [N, classes]
  Tensor<T> features;  // [N, feature_dim]; post-dropout in train mode
  ModelCaches<T> caches;
};

template <typename T>
ForwardResult<T> model_forward(Model<T>& model, const Tensor<T>& batch,
                               Mode mode) {
  batch.require_rank(4);
  if (batch.dim(1) != 1 || batch.dim(2) != kInputSide ||
      batch.dim(3) != kInputSide)
    throw ShapeError("model input must be [N,1,64,64], got " +
                     shape_to_string(batch.shape()));
  const Index n = batch.dim(0);
  const auto& widths = model.config().widths;
  auto expect = [](const Tensor<T>& t, Index channels, Index side,
                   const char* stage) {
    if (t.dim(1) != channels || t.dim(2) != side || t.dim(3) != side)
      throw ShapeError(std::string("stage ") + stage + " produced " +
                       shape_to_string(t.shape()));
  };

  ForwardResult<T> r;
  auto [a1, conv1_cache] = conv_forward(batch, model.conv1);
  expect(a1, widths[0], 64, "conv1");
  auto [r1, relu1_cache] = relu_forward(a1);
  auto [p1, pool1_cache] = maxpool_forward(r1, model.pool);
  expect(p1, widths[0], 32, "pool1");

  auto [a2, conv2_cache] = conv_forward(p1, model.conv2);
  expect(a2, widths[1], 32, "conv2");
  auto [r2, relu2_cache] = relu_forward(a2);
  auto [p2, pool2_cache] = maxpool_forward(r2, model.pool);
  expect(p2, widths[1], 16, "pool2");

  auto [a3, conv3_cache] = conv_forward(p2, model.conv3);
  expect(a3, widths[2], 16, "conv3");
  auto [r3, relu3_cache] = relu_forward(a3);
  auto [p3, pool3_cache] = maxpool_forward(r3, model.pool);
  expect(p3, widths[2], 8, "pool3");

  r.caches.pre_flatten_shape = p3.shape();
  Tensor<T> flat = std::move(p3).reshaped({n, widths[2] * 8 * 8});

  auto [z1, fc1_cache] = dense_forward(flat, model.fc1);
  auto [h1, relu4_cache] = relu_forward(z1);
  auto [d1, dropout_cache] = dropout_forward(
      h1, model.config().dropout_rate, mode, model.dropout_rng());

  r.features = (mode == Mode::kTrain) ? d1 : h1;
  auto [logits, fc2_cache] = dense_forward(d1, model.fc2);
  if (logits.dim(1) != model.config().classes)
    throw ShapeError("logits width mismatch");
  r.logits = std::move(logits);

  r.caches.conv1 = std::move(conv1_cache);
  r.caches.conv2 = std::move(conv2_cache);
  r.caches.conv3 = std::move(conv3_cache);
  r.caches.relu1 = std::move(relu1_cache);
  r.caches.relu2 = std::move(relu2_cache);
  r.caches.relu3 = std::move(relu3_cache);
  r.caches.relu4 = std::move(relu4_cache);
  r.caches.pool1 = std::move(pool1_cache);
  r.caches.pool2 = std::move(pool2_cache);
  r.caches.pool3 = std::move(pool3_cache);
  r.caches.fc1 = std::move(fc1_cache);
  r.caches.fc2 = std::move(fc2_cache);
  r.caches.dropout = std::move(dropout_cache);
  return r;
}

/// Parameter gradients in param_tensors() order.
template <typename T>
std::vector<Tensor<T>> model_backward(Model<T>& model, const Tensor<T>& dlogits,
                                      const ModelCaches<T>& caches) {
  auto g_fc2 = dense_backward(dlogits, model.fc2, caches.fc2);
  Tensor<T> d_h1 = dropout_backward(g_fc2.dx, caches.dropout);
  Tensor<T> d_z1 = relu_backward(d_h1, caches.relu4);
  auto g_fc1 = dense_backward(d_z1, model.fc1, caches.fc1);

  Tensor<T> d_p3 = std::move(g_fc1.dx).reshaped(caches.pre_flatten_shape);
  Tensor<T> d_r3 = maxpool_backward(d_p3, caches.pool3);
  Tensor<T> d_a3 = relu_backward(d_r3, caches.relu3);
  auto g_conv3 = conv_backward(d_a3, model.conv3, caches.conv3);

  Tensor<T> d_r2 = maxpool_backward(g_conv3.dx, caches.pool2);
  Tensor<T> d_a2 = relu_backward(d_r2, caches.relu2);
  auto g_conv2 = conv_backward(d_a2, model.conv2, caches.conv2);

  Tensor<T> d_r1 = maxpool_backward(g_conv2.dx, caches.pool1);
  Tensor<T> d_a1 = relu_backward(d_r1, caches.relu1);
  auto g_conv1 = conv_backward(d_a1, model.conv1, caches.conv1);

  std::vector<Tensor<T>> grads;
  grads.reserve(10);
  grads.push_back(std::move(g_conv1.dweights));
  grads.push_back(std::move(g_conv1.dbias));
  grads.push_back(std::move(g_conv2.dweights));
  grads.push_back(std::move(g_conv2.dbias));
  grads.push_back(std::move(g_conv3.dweights));
  grads.push_back(std::move(g_conv3.dbias));
  grads.push_back(std::move(g_fc1.dweights));
  grads.push_back(std::move(g_fc1.dbias));
  grads.push_back(std::move(g_fc2.dweights));
  grads.push_back(std::move(g_fc2.dbias));
  return grads;
}

}  // namespace ahcr
