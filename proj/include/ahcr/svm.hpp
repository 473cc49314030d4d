#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "ahcr/pipeline.hpp"
#include "ahcr/rng.hpp"
#include "ahcr/tensor.hpp"

namespace ahcr {

// One-vs-rest linear separators over penultimate features. Feature
// standardization (mean/scale) learned at training time is stored in the
// model and reapplied when scoring; a hand-built model keeps the identity
// transform.
template <typename T>
struct SvmModel {
  Tensor<T> weights;     // [classes, dim]
  Tensor<T> bias;        // [classes]
  Tensor<T> feat_mean;   // [dim]
  Tensor<T> feat_scale;  // [dim], multiplicative
  T reg_lambda = T(1e-4);

  Index classes() const { return weights.dim(0); }
  Index dim() const { return weights.dim(1); }
};

template <typename T>
SvmModel<T> make_svm_model(Index classes, Index dim) {
  if (classes < 2 || dim < 1) throw ShapeError("svm model needs classes >= 2, dim >= 1");
  SvmModel<T> m;
  m.weights = Tensor<T>::zeros({classes, dim});
  m.bias = Tensor<T>::zeros({classes});
  m.feat_mean = Tensor<T>::zeros({dim});
  m.feat_scale = Tensor<T>::full({dim}, T(1));
  return m;
}

struct SvmTrainConfig {
  double reg_lambda = 1e-4;
  double learning_rate = 0.01;
  int epochs = 50;
  int batch_size = 32;
  double dropout_rate = 0.5;
  std::uint64_t seed = 1;
};

inline void validate(const SvmTrainConfig& cfg) {
  if (!(cfg.reg_lambda > 0.0)) throw InputError("reg_lambda must be positive");
  if (!(cfg.learning_rate > 0.0))
    throw InputError("svm learning_rate must be positive");
  if (cfg.epochs < 0) throw InputError("svm epochs must be >= 0");
  if (cfg.batch_size < 1) throw InputError("svm batch_size must be >= 1");
  if (cfg.dropout_rate < 0.0 || cfg.dropout_rate >= 1.0)
    throw InputError("svm dropout_rate must be in [0,1)");
}

namespace detail {

template <typename T>
RowMatrixX<T> standardized_features(const SvmModel<T>& model,
                                    const Tensor<T>& features) {
  features.require_rank(2);
  if (features.dim(1) != model.dim())
    throw ShapeError("feature dim " + std::to_string(features.dim(1)) +
                     " != svm model dim " + std::to_string(model.dim()));
  Eigen::Map<const VectorX<T>> mean(model.feat_mean.data(), model.dim());
  Eigen::Map<const VectorX<T>> scale(model.feat_scale.data(), model.dim());
  RowMatrixX<T> x = features.matrix();
  x.rowwise() -= mean.transpose();
  x.array().rowwise() *= scale.transpose().array();
  return x;
}

}  // namespace detail

/// scores = standardize(features) * W^T + b
template <typename T>
Tensor<T> svm_scores(const SvmModel<T>& model, const Tensor<T>& features) {
  const RowMatrixX<T> x = detail::standardized_features(model, features);
  Tensor<T> scores = Tensor<T>::uninit({features.dim(0), model.classes()});
  Eigen::Map<const VectorX<T>> b(model.bias.data(), model.classes());
  scores.matrix().noalias() = x * model.weights.matrix().transpose();
  scores.matrix().rowwise() += b.transpose();
  return scores;
}

/// Argmax over scores; ties break to the lowest class id.
template <typename T>
std::vector<int> svm_predict(const SvmModel<T>& model,
                             const Tensor<T>& features) {
  return argmax_classes(svm_scores(model, features));
}

/// Mean per-class binary hinge plus lambda * ||W||^2.
template <typename T>
double svm_objective(const SvmModel<T>& model, const Tensor<T>& features,
                     const std::vector<int>& labels) {
  const Tensor<T> scores = svm_scores(model, features);
  const Index n = scores.dim(0), classes = scores.dim(1);
  if (static_cast<Index>(labels.size()) != n)
    throw InputError("label count does not match feature rows");
  double hinge = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    for (Index c = 0; c < classes; ++c) {
      const double t = (label == static_cast<int>(c) + 1) ? 1.0 : -1.0;
      const double margin =
          t * static_cast<double>(scores.data()[i * classes + c]);
      hinge += std::max(0.0, 1.0 - margin);
    }
  }
  const double reg = static_cast<double>(model.reg_lambda) *
                     static_cast<double>(model.weights.flat().squaredNorm());
  return hinge / static_cast<double>(n) + reg;
}

/// Mini-batch subgradient descent on the one-vs-rest hinge objective. A
/// fresh dropout mask hits each feature vector at every presentation
/// (survivors scaled by 1/(1-rate)); scoring applies no dropout.
template <typename T>
SvmModel<T> svm_train(const Tensor<T>& features, const std::vector<int>& labels,
                      const SvmTrainConfig& cfg, Index classes = 28,
                      const SvmModel<T>* warm_start = nullptr) {
  validate(cfg);
  features.require_rank(2);
  const Index n = features.dim(0), dim = features.dim(1);
  if (n < 1) throw InputError("svm_train needs at least one sample");
  if (static_cast<Index>(labels.size()) != n)
    throw InputError("label count does not match feature rows");
  for (int label : labels)
    if (label < 1 || label > classes)
      throw InputError("label " + std::to_string(label) + " outside 1.." +
                       std::to_string(classes));

  SvmModel<T> model;
  if (warm_start) {
    if (warm_start->dim() != dim || warm_start->classes() != classes)
      throw ShapeError("warm start shape mismatch");
    model = *warm_start;
  } else {
    model = make_svm_model<T>(classes, dim);
    // per-dimension standardization from the training set
    for (Index j = 0; j < dim; ++j) {
      double mean = 0.0;
      for (Index i = 0; i < n; ++i)
        mean += static_cast<double>(features.at(i, j));
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (Index i = 0; i < n; ++i) {
        const double d = static_cast<double>(features.at(i, j)) - mean;
        var += d * d;
      }
      var /= static_cast<double>(n);
      model.feat_mean[j] = static_cast<T>(mean);
      model.feat_scale[j] = static_cast<T>(1.0 / std::sqrt(var + 1e-8));
    }
  }
  model.reg_lambda = static_cast<T>(cfg.reg_lambda);

  const RowMatrixX<T> x_std = detail::standardized_features(model, features);
  Eigen::Map<RowMatrixX<T>> w(model.weights.data(), classes, dim);
  Eigen::Map<VectorX<T>> b(model.bias.data(), classes);

  const T lr = static_cast<T>(cfg.learning_rate);
  const T lambda = static_cast<T>(cfg.reg_lambda);
  const T keep_scale = static_cast<T>(1.0 / (1.0 - cfg.dropout_rate));

  Rng rng(mix_seed(cfg.seed, 0x5F5D));
  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});

  RowMatrixX<T> xb, scores, active;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (Index lo = 0; lo < n; lo += cfg.batch_size) {
      const Index hi = std::min<Index>(lo + cfg.batch_size, n);
      const Index bsz = hi - lo;
      xb.resize(bsz, dim);
      for (Index i = 0; i < bsz; ++i) {
        const auto row = static_cast<Index>(order[static_cast<std::size_t>(lo + i)]);
        if (cfg.dropout_rate > 0.0) {
          for (Index j = 0; j < dim; ++j)
            xb(i, j) = rng.uniform() < cfg.dropout_rate
                           ? T(0)
                           : x_std(row, j) * keep_scale;
        } else {
          xb.row(i) = x_std.row(row);
        }
      }
      scores.resize(bsz, classes);
      scores.noalias() = xb * w.transpose();
      scores.rowwise() += b.transpose();

      active.resize(bsz, classes);
      for (Index i = 0; i < bsz; ++i) {
        const int label =
            labels[order[static_cast<std::size_t>(lo + i)]];
        for (Index c = 0; c < classes; ++c) {
          const T t = (label == static_cast<int>(c) + 1) ? T(1) : T(-1);
          active(i, c) = (t * scores(i, c) < T(1)) ? -t : T(0);
        }
      }
      const T inv_b = T(1) / static_cast<T>(bsz);
      w -= lr * (inv_b * (active.transpose() * xb) + T(2) * lambda * w);
      b -= lr * inv_b * active.colwise().sum().transpose();
    }
  }
  return model;
}

}  // namespace ahcr
