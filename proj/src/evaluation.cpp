#include "ahcr/evaluation.hpp"

#include <algorithm>
#include <cstdio>

#include "ahcr/errors.hpp"
#include "ahcr/kmeans.hpp"

namespace ahcr {

namespace {

std::string format_row(const std::string& name, double crr, double ecr) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f\n", name.c_str(), crr,
                ecr);
  return buf;
}

constexpr const char* kTableHeader = "character       CRR (%)    ECR (%)\n";

}  // namespace

EvalReport evaluate_predictions(const std::vector<int>& predictions,
                                const std::vector<int>& truths,
                                std::string head) {
  if (truths.empty()) throw InputError("evaluate needs at least one sample");
  if (predictions.size() != truths.size())
    throw InputError("prediction count " + std::to_string(predictions.size()) +
                     " != sample count " + std::to_string(truths.size()));

  EvalReport report;
  report.head = std::move(head);
  report.total = static_cast<long>(truths.size());
  report.confusion =
      Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>::Zero(kNumClasses,
                                                                kNumClasses);
  long correct = 0;
  std::array<long, kNumClasses> class_correct{};
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int truth = truths[i];
    const int predicted = predictions[i];
    if (truth < 1 || truth > kNumClasses)
      throw InputError("true label " + std::to_string(truth) +
                       " outside 1..28");
    if (predicted < 1 || predicted > kNumClasses)
      throw InputError("predicted label " + std::to_string(predicted) +
                       " outside 1..28");
    report.confusion(truth - 1, predicted - 1) += 1;
    ++report.class_counts[static_cast<std::size_t>(truth - 1)];
    if (truth == predicted) {
      ++correct;
      ++class_correct[static_cast<std::size_t>(truth - 1)];
    }
  }
  report.crr =
      100.0 * static_cast<double>(correct) / static_cast<double>(report.total);
  report.ecr = 100.0 - report.crr;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    if (report.class_counts[idx] == 0) {
      // vacuous: no samples of this class in the set
      report.class_crr[idx] = 100.0;
    } else {
      report.class_crr[idx] = 100.0 * static_cast<double>(class_correct[idx]) /
                              static_cast<double>(report.class_counts[idx]);
    }
    report.class_ecr[idx] = 100.0 - report.class_crr[idx];
  }
  return report;
}

EvalReport evaluate(const BatchPredictor& predict_fn,
                    const std::vector<GlyphSample>& samples,
                    std::string head) {
  if (samples.empty()) throw InputError("evaluate needs at least one sample");
  const auto predictions = predict_fn(samples);
  std::vector<int> truths;
  truths.reserve(samples.size());
  for (const auto& s : samples) truths.push_back(s.label);
  return evaluate_predictions(predictions, truths, std::move(head));
}

std::string per_class_table(const EvalReport& report) {
  std::string out = kTableHeader;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    out += format_row(class_names()[idx], report.class_crr[idx],
                      report.class_ecr[idx]);
  }
  out += format_row("Average", report.crr, report.ecr);
  return out;
}

std::string by_cluster_table(const EvalReport& report) {
  const auto& groups = reference_partition();
  std::array<long, kNumStrokeGroups> counts{};
  std::array<double, kNumStrokeGroups> correct{};
  for (int c = 0; c < kNumClasses; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    const auto g = static_cast<std::size_t>(groups[idx] - 1);
    counts[g] += report.class_counts[idx];
    correct[g] += report.class_crr[idx] *
                  static_cast<double>(report.class_counts[idx]) / 100.0;
  }
  std::string out = kTableHeader;
  for (int g = 0; g < kNumStrokeGroups; ++g) {
    const auto idx = static_cast<std::size_t>(g);
    const double crr = counts[idx] == 0
                           ? 100.0
                           : 100.0 * correct[idx] /
                                 static_cast<double>(counts[idx]);
    out += format_row(stroke_group_names()[idx], crr, 100.0 - crr);
  }
  out += format_row("Average", report.crr, report.ecr);
  return out;
}

std::vector<std::tuple<int, int, long>> confusion_pairs(
    const EvalReport& report, int top_k) {
  if (top_k < 1) throw InputError("top_k must be >= 1");
  std::vector<std::tuple<int, int, long>> pairs;
  for (int t = 0; t < kNumClasses; ++t)
    for (int p = 0; p < kNumClasses; ++p) {
      if (t == p) continue;
      const long count = report.confusion(t, p);
      if (count > 0) pairs.emplace_back(t + 1, p + 1, count);
    }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<2>(a) != std::get<2>(b)) return std::get<2>(a) > std::get<2>(b);
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) < std::get<0>(b);
    return std::get<1>(a) < std::get<1>(b);
  });
  if (pairs.size() > static_cast<std::size_t>(top_k))
    pairs.resize(static_cast<std::size_t>(top_k));
  return pairs;
}

std::string confusion_csv(const EvalReport& report) {
  std::string out = "true\\pred";
  for (const auto& name : class_names()) out += "," + name;
  out += '\n';
  for (int t = 0; t < kNumClasses; ++t) {
    out += class_names()[static_cast<std::size_t>(t)];
    for (int p = 0; p < kNumClasses; ++p)
      out += ',' + std::to_string(report.confusion(t, p));
    out += '\n';
  }
  return out;
}

std::string summary_line(const EvalReport& report) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "head,crr,ecr\n%s,%.2f,%.2f\n",
                report.head.c_str(), report.crr, report.ecr);
  return buf;
}

std::string comparison_table(const std::vector<EvalReport>& reports) {
  std::string out = "head            CRR (%)    ECR (%)\n";
  for (const auto& r : reports) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-12s %10.2f %10.2f\n", r.head.c_str(),
                  r.crr, r.ecr);
    out += buf;
  }
  return out;
}

}  // namespace ahcr
