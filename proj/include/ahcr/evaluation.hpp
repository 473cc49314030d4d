#pragma once

#include <Eigen/Core>
#include <array>
#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "ahcr/catalog.hpp"
#include "ahcr/dataset.hpp"

namespace ahcr {

// Recognition-rate report. ECR is always the exact complement of CRR, for
// totals and per class. Confusion rows are true classes, columns predicted.
struct EvalReport {
  std::string head = "softmax";
  double crr = 0.0;
  double ecr = 0.0;
  std::array<double, kNumClasses> class_crr{};
  std::array<double, kNumClasses> class_ecr{};
  std::array<long, kNumClasses> class_counts{};
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> confusion;
  long total = 0;
};

using BatchPredictor =
    std::function<std::vector<int>(const std::vector<GlyphSample>&)>;

EvalReport evaluate_predictions(const std::vector<int>& predictions,
                                const std::vector<int>& truths,
                                std::string head);

EvalReport evaluate(const BatchPredictor& predict_fn,
                    const std::vector<GlyphSample>& samples, std::string head);

/// Per-class text table with a weighted Average row.
std::string per_class_table(const EvalReport& report);

/// Same rates aggregated into the 13 master-stroke groups.
std::string by_cluster_table(const EvalReport& report);

/// Off-diagonal confusion entries, descending by count, ties by ids.
std::vector<std::tuple<int, int, long>> confusion_pairs(
    const EvalReport& report, int top_k);

/// Name-labeled 28x28 count matrix.
std::string confusion_csv(const EvalReport& report);

/// Machine-readable `head,crr,ecr` summary.
std::string summary_line(const EvalReport& report);

/// Side-by-side head comparison (one row per report).
std::string comparison_table(const std::vector<EvalReport>& reports);

}  // namespace ahcr
