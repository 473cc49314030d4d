#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace ahcr {

// Everything a run needs, parseable from a flat `key = value` file with
// `#` comments; command-line flags override file values. Unknown keys are
// errors.
struct RunConfig {
  // network + SGD (canonical defaults)
  double learning_rate = 0.02;
  double momentum = 0.8;
  double weight_decay = 0.001;
  int batch_size = 32;
  int max_epochs = 400;
  std::uint64_t seed = 1;
  std::array<int, 3> widths = {128, 256, 512};
  double dropout_rate = 0.5;
  std::string precision = "float32";  // float32 | float64

  // svm head
  double svm_lambda = 1e-4;
  double svm_learning_rate = 0.01;
  int svm_epochs = 50;
  int svm_batch_size = 32;
  double svm_dropout_rate = 0.5;

  // data & output
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  bool invert = false;
  bool synth = false;
  int synth_per_class = 100;
  std::string out_dir = ".";
  int threads = 0;  // 0 = hardware default

  /// Set one key from its textual value; throws InputError on unknown
  /// keys or unparseable values.
  void set(const std::string& key, const std::string& value);

  /// Apply a `key = value` file (# comments, blank lines allowed).
  void apply_file(const std::string& path);

  /// `widths` rendered as "a,b,c".
  std::string widths_string() const;
};

/// Applies the reduced-scale preset (widths 16/32/64, 15 epochs).
void apply_preset(RunConfig& cfg, const std::string& name);

}  // namespace ahcr
