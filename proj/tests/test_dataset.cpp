#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ahcr/dataset.hpp"
#include "ahcr/rng.hpp"
#include "doctest.h"

using ahcr::GlyphSample;
using ahcr::Image;
using ahcr::Rng;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("ahcr_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
  static inline int counter = 0;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string zeros_row(int n) {
  std::string row;
  for (int i = 0; i < n; ++i) {
    row += '0';
    if (i + 1 < n) row += ',';
  }
  row += '\n';
  return row;
}

}  // namespace

TEST_CASE("one 1024-zero row becomes an all-zero 64x64 sample") {
  TempDir dir;
  write_file(dir.file("img.csv"), zeros_row(1024));
  write_file(dir.file("lbl.csv"), "1\n");
  auto samples = ahcr::load_csv(dir.file("img.csv"), dir.file("lbl.csv"));
  REQUIRE(samples.size() == 1);
  CHECK(samples[0].label == 1);
  CHECK(samples[0].image.rows() == 64);
  CHECK(samples[0].image.cols() == 64);
  CHECK(samples[0].image.maxCoeff() == 0.0f);
}

TEST_CASE("a 4096-column row skips the resize path") {
  TempDir dir;
  std::string row;
  for (int i = 0; i < 4096; ++i) {
    row += std::to_string(i % 256);
    if (i + 1 < 4096) row += ',';
  }
  row += '\n';
  write_file(dir.file("img.csv"), row);
  write_file(dir.file("lbl.csv"), "7\n");
  auto samples = ahcr::load_csv(dir.file("img.csv"), dir.file("lbl.csv"));
  REQUIRE(samples.size() == 1);
  // identity path: pixel k equals (k % 256) / 255
  CHECK(samples[0].image.data()[0] == 0.0f);
  CHECK(samples[0].image.data()[255] == 1.0f);
  CHECK(samples[0].image.data()[100] ==
        doctest::Approx(100.0f / 255.0f).epsilon(1e-12));
}

TEST_CASE("format errors: non-square, range, count mismatch, bad label") {
  TempDir dir;
  write_file(dir.file("lbl.csv"), "1\n");

  write_file(dir.file("bad1.csv"), zeros_row(1023));
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("bad1.csv"), dir.file("lbl.csv")),
                  ahcr::FormatError);

  write_file(dir.file("bad2.csv"), "0,256,0,0\n");
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("bad2.csv"), dir.file("lbl.csv")),
                  ahcr::FormatError);

  write_file(dir.file("bad3.csv"), "0,-4,0,0\n");
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("bad3.csv"), dir.file("lbl.csv")),
                  ahcr::FormatError);

  write_file(dir.file("img2.csv"), zeros_row(1024) + zeros_row(1024));
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("img2.csv"), dir.file("lbl.csv")),
                  ahcr::FormatError);

  write_file(dir.file("img1.csv"), zeros_row(1024));
  write_file(dir.file("lbl29.csv"), "29\n");
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("img1.csv"), dir.file("lbl29.csv")),
                  ahcr::FormatError);
  write_file(dir.file("lbl0.csv"), "0\n");
  CHECK_THROWS_AS(ahcr::load_csv(dir.file("img1.csv"), dir.file("lbl0.csv")),
                  ahcr::FormatError);

  CHECK_THROWS_AS(ahcr::load_csv(dir.file("missing.csv"), dir.file("lbl.csv")),
                  ahcr::FormatError);
}

TEST_CASE("invert flag flips ink polarity") {
  TempDir dir;
  write_file(dir.file("img.csv"), "255,0,0,255\n");
  write_file(dir.file("lbl.csv"), "3\n");
  auto normal = ahcr::load_csv(dir.file("img.csv"), dir.file("lbl.csv"));
  auto flipped =
      ahcr::load_csv(dir.file("img.csv"), dir.file("lbl.csv"), true);
  CHECK(normal[0].image(0, 0) == 1.0f);
  CHECK(flipped[0].image(0, 0) == 0.0f);
  CHECK(normal[0].image(63, 63) == 1.0f);
  CHECK(flipped[0].image(63, 63) == 0.0f);
}

TEST_CASE("resize keeps constants constant") {
  Image img = Image::Constant(32, 32, 0.42f);
  Image out = ahcr::resize_to_64(img);
  CHECK(out.rows() == 64);
  CHECK(out.cols() == 64);
  CHECK(out.minCoeff() == doctest::Approx(0.42f).epsilon(1e-6));
  CHECK(out.maxCoeff() == doctest::Approx(0.42f).epsilon(1e-6));
}

TEST_CASE("resize of a 64x64 image is the identity") {
  Rng rng(3);
  Image img(64, 64);
  for (Eigen::Index i = 0; i < img.size(); ++i)
    img.data()[i] = static_cast<float>(rng.uniform());
  Image out = ahcr::resize_to_64(img);
  CHECK((img - out).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("resize interpolates a 2x2 gradient monotonically") {
  Image img(2, 2);
  img << 0.0f, 1.0f, 0.0f, 1.0f;
  Image out = ahcr::resize_to_64(img);
  for (Eigen::Index i = 0; i < 64; ++i) {
    CHECK(out(i, 0) == 0.0f);
    CHECK(out(i, 63) == 1.0f);
    for (Eigen::Index j = 0; j + 1 < 64; ++j) CHECK(out(i, j) <= out(i, j + 1));
    // corner-aligned sampling makes column j exactly j/63
    CHECK(out(i, 17) ==
          doctest::Approx(17.0 / 63.0).epsilon(1e-6));
  }
}

TEST_CASE("resize rejects sub-2x2 inputs") {
  Image img(1, 1);
  img(0, 0) = 0.5f;
  CHECK_THROWS_AS(ahcr::resize_to_64(img), ahcr::InputError);
}

TEST_CASE("resize output stays within the input range") {
  Rng rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    Image img(32, 32);
    for (Eigen::Index i = 0; i < img.size(); ++i)
      img.data()[i] = static_cast<float>(rng.uniform());
    Image out = ahcr::resize_to_64(img);
    CHECK(out.minCoeff() >= img.minCoeff());
    CHECK(out.maxCoeff() <= img.maxCoeff());
  }
}

TEST_CASE("synthetic data is deterministic in the seed") {
  auto a = ahcr::synth_dataset(42, 3, 5);
  auto b = ahcr::synth_dataset(42, 3, 5);
  REQUIRE(a.train.size() == b.train.size());
  REQUIRE(a.test.size() == b.test.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].label == b.train[i].label);
    CHECK((a.train[i].image - b.train[i].image).cwiseAbs().maxCoeff() == 0.0f);
  }
  auto c = ahcr::synth_dataset(43, 3, 5);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.train.size() && !any_diff; ++i)
    if ((a.train[i].image - c.train[i].image).cwiseAbs().maxCoeff() > 0)
      any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("synthetic split mirrors the 80/20 proportions") {
  auto data = ahcr::synth_dataset(7, 10, 28);
  CHECK(data.train.size() == 8 * 28);
  CHECK(data.test.size() == 2 * 28);
  std::array<int, 29> train_counts{};
  for (const auto& s : data.train) ++train_counts[static_cast<std::size_t>(s.label)];
  for (int c = 1; c <= 28; ++c) CHECK(train_counts[static_cast<std::size_t>(c)] == 8);

  CHECK_THROWS_AS(ahcr::synth_dataset(7, 1, 28), ahcr::InputError);
}

TEST_CASE("synthetic pixels are quantized to 255ths in [0,1]") {
  auto data = ahcr::synth_dataset(11, 2, 4);
  for (const auto& s : data.train) {
    CHECK(s.image.minCoeff() >= 0.0f);
    CHECK(s.image.maxCoeff() <= 1.0f);
    for (Eigen::Index i = 0; i < s.image.size(); ++i) {
      const double scaled = static_cast<double>(s.image.data()[i]) * 255.0;
      CHECK(std::abs(scaled - std::lround(scaled)) < 1e-4);
    }
  }
}

TEST_CASE("save/load round-trip is lossless for 64x64 data") {
  TempDir dir;
  auto data = ahcr::synth_dataset(13, 2, 6);
  ahcr::save_csv(dir.file("img.csv"), dir.file("lbl.csv"), data.train);
  auto loaded = ahcr::load_csv(dir.file("img.csv"), dir.file("lbl.csv"));
  REQUIRE(loaded.size() == data.train.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    CHECK(loaded[i].label == data.train[i].label);
    CHECK((loaded[i].image - data.train[i].image).cwiseAbs().maxCoeff() ==
          0.0f);
  }
  ahcr::save_csv(dir.file("img2.csv"), dir.file("lbl2.csv"), loaded);
  CHECK(read_file(dir.file("img.csv")) == read_file(dir.file("img2.csv")));
  CHECK(read_file(dir.file("lbl.csv")) == read_file(dir.file("lbl2.csv")));
}

TEST_CASE("feature files round-trip bit-exactly") {
  TempDir dir;
  Rng rng(17);
  auto features = ahcr::Tensor<float>::uninit({5, 8});
  for (ahcr::Index i = 0; i < features.size(); ++i)
    features[i] = static_cast<float>(rng.normal() * 3.7);
  std::vector<int> labels = {1, 5, 28, 2, 2};
  ahcr::save_features_csv(dir.file("f.csv"), features, labels);
  auto [loaded, loaded_labels] = ahcr::load_features_csv(dir.file("f.csv"));
  REQUIRE(loaded.shape() == features.shape());
  CHECK(loaded_labels == labels);
  CHECK(ahcr::max_abs_diff(loaded, features) == 0.0f);
}
