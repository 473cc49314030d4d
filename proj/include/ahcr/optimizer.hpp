#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "ahcr/pipeline.hpp"

namespace ahcr {

// Mini-batch SGD with classical momentum and decay-inside-gradient weight
// decay. max_epochs carries the iteration budget; one epoch is one pass
// over the shuffled training set.
struct SgdConfig {
  double learning_rate = 0.02;
  double momentum = 0.8;
  double weight_decay = 0.001;
  int batch_size = 32;
  int max_epochs = 400;
  std::uint64_t seed = 1;
  bool decay_biases = false;
};

inline void validate(const SgdConfig& cfg) {
  if (!(cfg.learning_rate > 0.0))
    throw InputError("learning_rate must be positive");
  if (cfg.momentum < 0.0 || cfg.momentum >= 1.0)
    throw InputError("momentum must be in [0,1)");
  if (cfg.batch_size < 1) throw InputError("batch_size must be >= 1");
  if (cfg.max_epochs < 0) throw InputError("max_epochs must be >= 0");
  if (cfg.weight_decay < 0.0) throw InputError("weight_decay must be >= 0");
}

/// v <- momentum*v - lr*(g + wd*p); p <- p + v. Biases skip decay unless
/// decay_biases is set.
template <typename T>
void sgd_step(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& velocity,
              const SgdConfig& cfg, bool is_bias = false) {
  if (!param.same_shape(grad) || !param.same_shape(velocity))
    throw ShapeError("sgd_step shape mismatch: param " +
                     shape_to_string(param.shape()) + ", grad " +
                     shape_to_string(grad.shape()) + ", velocity " +
                     shape_to_string(velocity.shape()));
  const T lr = static_cast<T>(cfg.learning_rate);
  const T m = static_cast<T>(cfg.momentum);
  const T wd = (is_bias && !cfg.decay_biases)
                   ? T(0)
                   : static_cast<T>(cfg.weight_decay);
  velocity.flat() = m * velocity.flat() - lr * (grad.flat() + wd * param.flat());
  param.flat() += velocity.flat();
}

struct EpochRecord {
  int epoch = 0;           // 1-based
  double train_loss = 0;   // mean per-sample loss over the epoch's batches
  double train_acc = 0;    // % correct on training batches (pre-update logits)
  double test_acc = 0;     // % correct on the test set after the epoch
};

struct TrainHistory {
  std::vector<EpochRecord> records;

  std::string to_csv() const {
    std::string out = "epoch,train_loss,train_acc,test_acc\n";
    char buf[128];
    for (const auto& r : records) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.4f,%.4f\n", r.epoch,
                    r.train_loss, r.train_acc, r.test_acc);
      out += buf;
    }
    return out;
  }
};

template <typename T>
double accuracy_percent(Model<T>& model, const std::vector<GlyphSample>& samples,
                        std::size_t batch_size = 32) {
  if (samples.empty()) return 0.0;
  const auto predictions = predict_classes(model, samples, batch_size);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (predictions[i] == samples[i].label) ++correct;
  return 100.0 * static_cast<double>(correct) /
         static_cast<double>(samples.size());
}

using EpochCallback = std::function<void(const EpochRecord&)>;

template <typename T>
TrainHistory train(Model<T>& model, const std::vector<GlyphSample>& train_set,
                   const std::vector<GlyphSample>& test_set,
                   const SgdConfig& cfg, const EpochCallback& on_epoch = {}) {
  validate(cfg);
  if (train_set.empty()) throw InputError("training set is empty");

  TrainHistory history;
  Rng shuffle_rng(mix_seed(cfg.seed, 0x5821));
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto params = model.param_tensors();

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t correct = 0;
    const std::size_t batch_count =
        (train_set.size() + static_cast<std::size_t>(cfg.batch_size) - 1) /
        static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t b = 0; b < batch_count; ++b) {
      const std::size_t lo = b * static_cast<std::size_t>(cfg.batch_size);
      const std::size_t hi =
          std::min(lo + static_cast<std::size_t>(cfg.batch_size),
                   train_set.size());
      std::vector<std::size_t> ids(order.begin() + static_cast<long>(lo),
                                   order.begin() + static_cast<long>(hi));
      std::vector<int> labels;
      labels.reserve(ids.size());
      for (std::size_t id : ids) labels.push_back(train_set[id].label);

      auto fwd = model_forward(model, make_batch<T>(train_set, ids),
                               Mode::kTrain);
      auto [loss, dlogits] = softmax_cross_entropy(fwd.logits, labels);
      if (!std::isfinite(static_cast<double>(loss)))
        throw DivergedError("non-finite loss at epoch " +
                                std::to_string(epoch) + ", batch " +
                                std::to_string(b),
                            epoch, static_cast<long>(b));
      const auto batch_predictions = argmax_classes(fwd.logits);
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (batch_predictions[i] == labels[i]) ++correct;
      loss_sum += static_cast<double>(loss) * static_cast<double>(ids.size());

      auto grads = model_backward(model, dlogits, fwd.caches);
      for (std::size_t p = 0; p < params.size(); ++p)
        sgd_step(*params[p].tensor, grads[p], model.velocity(p), cfg,
                 params[p].is_bias);
    }
    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(train_set.size());
    record.train_acc = 100.0 * static_cast<double>(correct) /
                       static_cast<double>(train_set.size());
    record.test_acc = accuracy_percent(
        model, test_set, static_cast<std::size_t>(cfg.batch_size));
    history.records.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return history;
}

}  // namespace ahcr
