#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ahcr/model.hpp"
#include "ahcr/svm.hpp"
#include "ahcr/tensor.hpp"

namespace ahcr {

struct TensorEntry {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

// Single-file recognizer: named float32 tensors with shapes, payload
// protected by a trailing CRC-32. The CNN, the SVM head and the cluster
// assignment all live in the same container.
class ModelContainer {
 public:
  static constexpr std::uint32_t kVersion = 1;

  /// Adds or replaces the entry with this name.
  void add(std::string name, Shape shape, std::vector<float> data);
  bool has(const std::string& name) const;
  const TensorEntry& get(const std::string& name) const;
  const std::vector<TensorEntry>& entries() const { return entries_; }

 private:
  std::vector<TensorEntry> entries_;
};

std::uint32_t crc32(const unsigned char* data, std::size_t size);

void save_container(const ModelContainer& container, const std::string& path);
ModelContainer load_container(const std::string& path);

// ---------------------------------------------------------------------------
// Bridges between live models and container entries.

namespace detail {

template <typename T>
std::vector<float> to_floats(const Tensor<T>& t) {
  std::vector<float> out(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i)
    out[static_cast<std::size_t>(i)] = static_cast<float>(t[i]);
  return out;
}

template <typename T>
Tensor<T> from_entry(const TensorEntry& entry) {
  Tensor<T> t = Tensor<T>::uninit(entry.shape);
  for (Index i = 0; i < t.size(); ++i)
    t[i] = static_cast<T>(entry.data[static_cast<std::size_t>(i)]);
  return t;
}

}  // namespace detail

template <typename T>
ModelContainer model_to_container(Model<T>& model) {
  ModelContainer container;
  for (auto& ref : model.param_tensors())
    container.add(ref.name, ref.tensor->shape(),
                  detail::to_floats(*ref.tensor));
  container.add("meta.dropout_rate", {1},
                {static_cast<float>(model.config().dropout_rate)});
  return container;
}

template <typename T>
Model<T> model_from_container(const ModelContainer& container) {
  const auto& w1 = container.get("conv1.weight");
  const auto& w2 = container.get("conv2.weight");
  const auto& w3 = container.get("conv3.weight");
  const auto& fc2 = container.get("fc2.weight");
  if (w1.shape.size() != 4 || w2.shape.size() != 4 || w3.shape.size() != 4 ||
      fc2.shape.size() != 2)
    throw FormatError("container holds malformed layer shapes");

  ModelConfig cfg;
  cfg.widths = {w1.shape[0], w2.shape[0], w3.shape[0]};
  cfg.classes = fc2.shape[0];
  cfg.feature_dim = fc2.shape[1];
  cfg.dropout_rate =
      static_cast<double>(container.get("meta.dropout_rate").data.at(0));
  cfg.seed = 0;
  Model<T> model(cfg);
  for (auto& ref : model.param_tensors()) {
    const auto& entry = container.get(ref.name);
    if (entry.shape != ref.tensor->shape())
      throw FormatError("container tensor " + ref.name +
                        " has unexpected shape " + shape_to_string(entry.shape));
    *ref.tensor = detail::from_entry<T>(entry);
  }
  return model;
}

template <typename T>
void svm_to_container(const SvmModel<T>& svm, ModelContainer& container) {
  container.add("svm.weight", svm.weights.shape(),
                detail::to_floats(svm.weights));
  container.add("svm.bias", svm.bias.shape(), detail::to_floats(svm.bias));
  container.add("svm.mean", svm.feat_mean.shape(),
                detail::to_floats(svm.feat_mean));
  container.add("svm.scale", svm.feat_scale.shape(),
                detail::to_floats(svm.feat_scale));
  container.add("svm.lambda", {1}, {static_cast<float>(svm.reg_lambda)});
}

inline bool has_svm_section(const ModelContainer& container) {
  return container.has("svm.weight");
}

template <typename T>
SvmModel<T> svm_from_container(const ModelContainer& container) {
  if (!has_svm_section(container))
    throw FormatError(
        "container has no svm section; run svm-train on this model first");
  SvmModel<T> svm;
  svm.weights = detail::from_entry<T>(container.get("svm.weight"));
  svm.bias = detail::from_entry<T>(container.get("svm.bias"));
  svm.feat_mean = detail::from_entry<T>(container.get("svm.mean"));
  svm.feat_scale = detail::from_entry<T>(container.get("svm.scale"));
  svm.reg_lambda = static_cast<T>(container.get("svm.lambda").data.at(0));
  return svm;
}

inline void cluster_to_container(const std::vector<int>& cluster_of_class,
                                 ModelContainer& container) {
  std::vector<float> data;
  data.reserve(cluster_of_class.size());
  for (int c : cluster_of_class) data.push_back(static_cast<float>(c));
  container.add("cluster.assignment",
                {static_cast<Index>(cluster_of_class.size())},
                std::move(data));
}

inline std::optional<std::vector<int>> cluster_from_container(
    const ModelContainer& container) {
  if (!container.has("cluster.assignment")) return std::nullopt;
  const auto& entry = container.get("cluster.assignment");
  std::vector<int> out;
  out.reserve(entry.data.size());
  for (float v : entry.data) out.push_back(static_cast<int>(v));
  return out;
}

}  // namespace ahcr
