#pragma once

#include <utility>
#include <vector>

#include "ahcr/dataset.hpp"
#include "ahcr/model.hpp"

namespace ahcr {

/// Stacks samples[ids] into an [N,1,64,64] batch.
template <typename T>
Tensor<T> make_batch(const std::vector<GlyphSample>& samples,
                     const std::vector<std::size_t>& ids) {
  const Index n = static_cast<Index>(ids.size());
  Tensor<T> batch = Tensor<T>::uninit({n, 1, kInputSide, kInputSide});
  const Index plane = kInputSide * kInputSide;
  for (Index i = 0; i < n; ++i) {
    const Image& img = samples[ids[static_cast<std::size_t>(i)]].image;
    T* dst = batch.data() + i * plane;
    const float* src = img.data();
    for (Index j = 0; j < plane; ++j) dst[j] = static_cast<T>(src[j]);
  }
  return batch;
}

/// Row-wise argmax as 1-based class ids; ties break to the lowest id.
template <typename T>
std::vector<int> argmax_classes(const Tensor<T>& scores) {
  scores.require_rank(2);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(scores.dim(0)));
  for (Index i = 0; i < scores.dim(0); ++i) {
    const T* row = scores.data() + i * scores.dim(1);
    Index best = 0;
    for (Index j = 1; j < scores.dim(1); ++j)
      if (row[j] > row[best]) best = j;
    out.push_back(static_cast<int>(best) + 1);
  }
  return out;
}

template <typename T>
std::vector<int> predict_classes(Model<T>& model,
                                 const std::vector<GlyphSample>& samples,
                                 std::size_t batch_size = 32) {
  std::vector<int> predictions;
  predictions.reserve(samples.size());
  std::vector<std::size_t> ids;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    ids.clear();
    for (std::size_t i = start;
         i < std::min(start + batch_size, samples.size()); ++i)
      ids.push_back(i);
    auto result =
        model_forward(model, make_batch<T>(samples, ids), Mode::kInference);
    for (int c : argmax_classes(result.logits)) predictions.push_back(c);
  }
  return predictions;
}

/// Inference-mode penultimate features for every sample, with labels.
template <typename T>
std::pair<Tensor<T>, std::vector<int>> extract_features(
    Model<T>& model, const std::vector<GlyphSample>& samples,
    std::size_t batch_size = 32) {
  const Index n = static_cast<Index>(samples.size());
  const Index dim = model.config().feature_dim;
  Tensor<T> features = Tensor<T>::uninit({n, dim});
  std::vector<int> labels;
  labels.reserve(samples.size());
  std::vector<std::size_t> ids;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    ids.clear();
    for (std::size_t i = start;
         i < std::min(start + batch_size, samples.size()); ++i)
      ids.push_back(i);
    auto result =
        model_forward(model, make_batch<T>(samples, ids), Mode::kInference);
    std::copy(result.features.data(),
              result.features.data() + result.features.size(),
              features.data() + static_cast<Index>(start) * dim);
  }
  for (const auto& s : samples) labels.push_back(s.label);
  return {std::move(features), std::move(labels)};
}

}  // namespace ahcr
