#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ahcr/tensor.hpp"

namespace ahcr {

using Image =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GlyphSample {
  Image image;    // 64x64, values in [0,1]
  int label = 0;  // 1..28
};

struct DatasetSplit {
  std::vector<GlyphSample> train;
  std::vector<GlyphSample> test;
};

/// Bilinear resize to 64x64 with corner-aligned sampling. Identity for
/// 64x64 inputs; the output never leaves the input's [min, max] range.
Image resize_to_64(const Image& image);

/// Headerless CSV of grayscale rows, one image per row, values 0..255,
/// perfect-square column count. Images are scaled to [0,1] and resized
/// to 64x64.
std::vector<Image> load_images_csv(const std::string& path,
                                   bool invert = false);

/// One label per row, 1..28.
std::vector<int> load_labels_csv(const std::string& path);

/// Loads the image/label pair; row counts must agree.
std::vector<GlyphSample> load_csv(const std::string& images_path,
                                  const std::string& labels_path,
                                  bool invert = false);

/// Writes samples back out in the same CSV shape (pixels as integers
/// 0..255). Lossless round-trip for images quantized to 255ths.
void save_csv(const std::string& images_path, const std::string& labels_path,
              const std::vector<GlyphSample>& samples);

/// Deterministic glyph-like dataset: per class a fixed random stroke
/// skeleton, thickened and jittered per sample, split 80/20.
DatasetSplit synth_dataset(std::uint64_t seed, int n_per_class,
                           int n_classes = 28);

// Feature-file helpers (one row per sample: feature columns then the label).
void save_features_csv(const std::string& path, const Tensor<float>& features,
                       const std::vector<int>& labels);
std::pair<Tensor<float>, std::vector<int>> load_features_csv(
    const std::string& path);

}  // namespace ahcr
