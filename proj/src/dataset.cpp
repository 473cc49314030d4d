#include "ahcr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ahcr/catalog.hpp"
#include "ahcr/errors.hpp"
#include "ahcr/rng.hpp"

namespace ahcr {

namespace {

std::vector<double> parse_csv_row(const std::string& line,
                                  const std::string& path,
                                  std::size_t line_no) {
  std::vector<double> values;
  values.reserve(4096);
  const char* p = line.data();
  const char* end = p + line.size();
  auto skip_ws = [&] {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  };
  skip_ws();
  while (p < end) {
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc())
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": unparseable numeric value");
    values.push_back(v);
    p = next;
    skip_ws();
    if (p < end) {
      if (*p != ',')
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": expected ',' separator");
      ++p;
      skip_ws();
    }
  }
  if (values.empty())
    throw FormatError(path + ":" + std::to_string(line_no) + ": empty row");
  return values;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return in;
}

}  // namespace

Image resize_to_64(const Image& image) {
  const Eigen::Index rows = image.rows(), cols = image.cols();
  if (rows < 2 || cols < 2)
    throw InputError("resize needs at least 2x2 input, got " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  if (rows == 64 && cols == 64) return image;

  Image out(64, 64);
  const double sy = static_cast<double>(rows - 1) / 63.0;
  const double sx = static_cast<double>(cols - 1) / 63.0;
  for (Eigen::Index i = 0; i < 64; ++i) {
    const double y = i * sy;
    const auto y0 = static_cast<Eigen::Index>(std::floor(y));
    const Eigen::Index y1 = std::min(y0 + 1, rows - 1);
    const double fy = y - static_cast<double>(y0);
    for (Eigen::Index j = 0; j < 64; ++j) {
      const double x = j * sx;
      const auto x0 = static_cast<Eigen::Index>(std::floor(x));
      const Eigen::Index x1 = std::min(x0 + 1, cols - 1);
      const double fx = x - static_cast<double>(x0);
      const double v = (1.0 - fy) * ((1.0 - fx) * image(y0, x0) +
                                     fx * image(y0, x1)) +
                       fy * ((1.0 - fx) * image(y1, x0) + fx * image(y1, x1));
      out(i, j) = static_cast<float>(v);
    }
  }
  return out;
}

std::vector<Image> load_images_csv(const std::string& path, bool invert) {
  std::ifstream in = open_or_throw(path);
  std::vector<Image> images;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected_cols = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto values = parse_csv_row(line, path, line_no);
    if (expected_cols == 0) {
      expected_cols = values.size();
    } else if (values.size() != expected_cols) {
      throw FormatError(path + ":" + std::to_string(line_no) + ": row has " +
                        std::to_string(values.size()) + " columns, expected " +
                        std::to_string(expected_cols));
    }
    const auto side =
        static_cast<Eigen::Index>(std::lround(std::sqrt(values.size())));
    if (side * side != static_cast<Eigen::Index>(values.size()))
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": column count " + std::to_string(values.size()) +
                        " is not a perfect square");
    if (side < 2)
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": image side must be at least 2");
    Image raw(side, side);
    for (Eigen::Index i = 0; i < side * side; ++i) {
      double v = values[static_cast<std::size_t>(i)];
      if (!(v >= 0.0 && v <= 255.0))
        throw FormatError(path + ":" + std::to_string(line_no) +
                          ": pixel value outside 0..255");
      if (invert) v = 255.0 - v;
      raw.data()[i] = static_cast<float>(v / 255.0);
    }
    images.push_back(resize_to_64(raw));
  }
  if (images.empty()) throw FormatError(path + ": no image rows");
  return images;
}

std::vector<int> load_labels_csv(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto values = parse_csv_row(line, path, line_no);
    if (values.size() != 1)
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": expected a single label column");
    const double v = values[0];
    const int label = static_cast<int>(v);
    if (static_cast<double>(label) != v || label < 1 || label > kNumClasses)
      throw FormatError(path + ":" + std::to_string(line_no) + ": label " +
                        std::to_string(v) + " outside 1.." +
                        std::to_string(kNumClasses));
    labels.push_back(label);
  }
  if (labels.empty()) throw FormatError(path + ": no label rows");
  return labels;
}

std::vector<GlyphSample> load_csv(const std::string& images_path,
                                  const std::string& labels_path,
                                  bool invert) {
  auto images = load_images_csv(images_path, invert);
  auto labels = load_labels_csv(labels_path);
  if (images.size() != labels.size())
    throw FormatError("row count mismatch: " + std::to_string(images.size()) +
                      " images vs " + std::to_string(labels.size()) +
                      " labels");
  std::vector<GlyphSample> samples;
  samples.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i)
    samples.push_back({std::move(images[i]), labels[i]});
  return samples;
}

void save_csv(const std::string& images_path, const std::string& labels_path,
              const std::vector<GlyphSample>& samples) {
  std::ofstream img_out(images_path);
  std::ofstream lbl_out(labels_path);
  if (!img_out || !lbl_out)
    throw FormatError("cannot write " + images_path + " / " + labels_path);
  for (const auto& s : samples) {
    const float* p = s.image.data();
    const Eigen::Index n = s.image.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const long v = std::lround(static_cast<double>(p[i]) * 255.0);
      img_out << std::clamp(v, 0L, 255L);
      if (i + 1 < n) img_out << ',';
    }
    img_out << '\n';
    lbl_out << s.label << '\n';
  }
}

// --------------------------------------------------------------------------
// Synthetic glyphs

namespace {

struct Skeleton {
  std::vector<Eigen::Vector2d> points;
  double thickness = 3.0;
};

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Solid core of radius thickness/2 with a ~1px linear falloff, quantized
// to 255ths like a scanned grayscale image.
Image render_skeleton(const Skeleton& sk) {
  Eigen::Matrix<double, 64, 64> acc = Eigen::Matrix<double, 64, 64>::Zero();
  const double radius = sk.thickness * 0.5;
  const double edge = 1.0;
  for (std::size_t s = 0; s + 1 < sk.points.size(); ++s) {
    const Eigen::Vector2d a = sk.points[s], b = sk.points[s + 1];
    const int x_lo = std::max(0, static_cast<int>(std::floor(
                                     std::min(a.x(), b.x()) - radius - edge)));
    const int x_hi = std::min(63, static_cast<int>(std::ceil(
                                      std::max(a.x(), b.x()) + radius + edge)));
    const int y_lo = std::max(0, static_cast<int>(std::floor(
                                     std::min(a.y(), b.y()) - radius - edge)));
    const int y_hi = std::min(63, static_cast<int>(std::ceil(
                                      std::max(a.y(), b.y()) + radius + edge)));
    for (int y = y_lo; y <= y_hi; ++y) {
      for (int x = x_lo; x <= x_hi; ++x) {
        const double d =
            segment_distance({static_cast<double>(x), static_cast<double>(y)},
                             a, b);
        const double v = std::clamp((radius + edge - d) / edge, 0.0, 1.0);
        acc(y, x) = std::max(acc(y, x), v);
      }
    }
  }
  Image img(64, 64);
  for (Eigen::Index i = 0; i < 64; ++i)
    for (Eigen::Index j = 0; j < 64; ++j) {
      const long q = std::lround(acc(i, j) * 255.0);
      img(i, j) = static_cast<float>(q) / 255.0f;
    }
  return img;
}

Skeleton random_skeleton(Rng& rng) {
  Skeleton sk;
  const int n_points = 4 + static_cast<int>(rng.below(3));
  sk.points.resize(static_cast<std::size_t>(n_points));
  for (auto& p : sk.points)
    p = {rng.uniform(12.0, 52.0), rng.uniform(12.0, 52.0)};
  sk.thickness = 2.0 + rng.uniform() * 1.5;
  return sk;
}

Skeleton jitter_skeleton(const Skeleton& proto, Rng& rng) {
  Skeleton sk = proto;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  for (const auto& p : sk.points) center += p;
  center /= static_cast<double>(sk.points.size());

  const double angle = rng.uniform(-0.12, 0.12);
  const double scale = rng.uniform(0.92, 1.08);
  const Eigen::Vector2d shift{rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5)};
  const double c = std::cos(angle), s = std::sin(angle);
  for (auto& p : sk.points) {
    Eigen::Vector2d d = (p - center) * scale;
    p = center + Eigen::Vector2d{c * d.x() - s * d.y(),
                                 s * d.x() + c * d.y()} +
        shift;
    p.x() = std::clamp(p.x() + rng.normal(0.0, 0.7), 3.0, 61.0);
    p.y() = std::clamp(p.y() + rng.normal(0.0, 0.7), 3.0, 61.0);
  }
  sk.thickness = std::max(1.5, proto.thickness * rng.uniform(0.85, 1.15));
  return sk;
}

constexpr double kMinPrototypeDistance = 10.0;

}  // namespace

DatasetSplit synth_dataset(std::uint64_t seed, int n_per_class,
                           int n_classes) {
  if (n_per_class < 2) throw InputError("synth_dataset needs n_per_class >= 2");
  if (n_classes < 1 || n_classes > kNumClasses)
    throw InputError("n_classes outside 1.." + std::to_string(kNumClasses));

  // Fixed per-class skeletons, regenerated until pairwise well separated.
  std::vector<Skeleton> protos;
  std::vector<Image> proto_images;
  Rng proto_rng(mix_seed(seed, 0x517A));
  for (int c = 0; c < n_classes; ++c) {
    for (int attempt = 0;; ++attempt) {
      Skeleton sk = random_skeleton(proto_rng);
      Image img = render_skeleton(sk);
      bool separated = true;
      for (const auto& other : proto_images) {
        if ((img - other).norm() < kMinPrototypeDistance) {
          separated = false;
          break;
        }
      }
      if (separated) {
        protos.push_back(std::move(sk));
        proto_images.push_back(std::move(img));
        break;
      }
      if (attempt > 500)
        throw InputError("could not separate synthetic class prototypes");
    }
  }

  const int n_test = std::max(1, n_per_class / 5);
  const int n_train = n_per_class - n_test;

  DatasetSplit split;
  split.train.reserve(static_cast<std::size_t>(n_train) * n_classes);
  split.test.reserve(static_cast<std::size_t>(n_test) * n_classes);
  for (int c = 0; c < n_classes; ++c) {
    for (int i = 0; i < n_per_class; ++i) {
      Rng sample_rng(mix_seed(seed, static_cast<std::uint64_t>(c),
                              static_cast<std::uint64_t>(i)));
      Image img = render_skeleton(jitter_skeleton(protos[static_cast<std::size_t>(c)], sample_rng));
      GlyphSample sample{std::move(img), c + 1};
      if (i < n_train)
        split.train.push_back(std::move(sample));
      else
        split.test.push_back(std::move(sample));
    }
  }
  return split;
}

// --------------------------------------------------------------------------
// Feature files

void save_features_csv(const std::string& path, const Tensor<float>& features,
                       const std::vector<int>& labels) {
  features.require_rank(2);
  if (features.dim(0) != static_cast<Index>(labels.size()))
    throw InputError("feature row count does not match label count");
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  char buf[64];
  for (Index i = 0; i < features.dim(0); ++i) {
    for (Index j = 0; j < features.dim(1); ++j) {
      std::snprintf(buf, sizeof buf, "%.9g",
                    static_cast<double>(features.at(i, j)));
      out << buf << ',';
    }
    out << labels[static_cast<std::size_t>(i)] << '\n';
  }
}

std::pair<Tensor<float>, std::vector<int>> load_features_csv(
    const std::string& path) {
  std::ifstream in = open_or_throw(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    rows.push_back(parse_csv_row(line, path, line_no));
    if (rows.back().size() < 2)
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": feature row needs features plus a label");
    if (rows.back().size() != rows.front().size())
      throw FormatError(path + ":" + std::to_string(line_no) +
                        ": ragged feature rows");
  }
  if (rows.empty()) throw FormatError(path + ": no feature rows");
  const Index n = static_cast<Index>(rows.size());
  const Index dim = static_cast<Index>(rows.front().size()) - 1;
  Tensor<float> features = Tensor<float>::uninit({n, dim});
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Index j = 0; j < dim; ++j)
      features.at(i, j) = static_cast<float>(row[static_cast<std::size_t>(j)]);
    const double lv = row.back();
    const int label = static_cast<int>(lv);
    if (static_cast<double>(label) != lv || label < 1 || label > kNumClasses)
      throw FormatError(path + ": label " + std::to_string(lv) +
                        " outside 1.." + std::to_string(kNumClasses));
    labels.push_back(label);
  }
  return {std::move(features), std::move(labels)};
}

}  // namespace ahcr
