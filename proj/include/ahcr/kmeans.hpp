#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ahcr/catalog.hpp"
#include "ahcr/rng.hpp"
#include "ahcr/tensor.hpp"

namespace ahcr {

template <typename T>
struct ClusterAssignment {
  std::vector<int> cluster_of;        // per point, 1-based cluster id
  MatrixX<T> centers;                 // [k, dim]
  double inertia = 0.0;               // against the returned centers
  std::vector<double> inertia_trace;  // post-assignment value per iteration
  int iterations = 0;
};

/// Per-class mean of feature rows; every class 1..classes must appear.
template <typename T>
MatrixX<T> class_centroids(const Tensor<T>& features,
                           const std::vector<int>& labels,
                           int classes = kNumClasses) {
  features.require_rank(2);
  const Index n = features.dim(0), dim = features.dim(1);
  if (static_cast<Index>(labels.size()) != n)
    throw InputError("label count does not match feature rows");
  MatrixX<T> centroids = MatrixX<T>::Zero(classes, dim);
  std::vector<Index> counts(static_cast<std::size_t>(classes), 0);
  for (Index i = 0; i < n; ++i) {
    const int label = labels[static_cast<std::size_t>(i)];
    if (label < 1 || label > classes)
      throw InputError("label " + std::to_string(label) + " outside 1.." +
                       std::to_string(classes));
    centroids.row(label - 1) += features.matrix().row(i);
    ++counts[static_cast<std::size_t>(label - 1)];
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InputError("class " + std::to_string(c + 1) + " has no samples");
    centroids.row(c) /= static_cast<T>(counts[static_cast<std::size_t>(c)]);
  }
  return centroids;
}

/// Lloyd iterations from k-means++ seeding. Ties in the nearest-center
/// search break to the lowest center index; an empty cluster steals the
/// point farthest from its current center (from clusters that keep at
/// least one other member). Returned centers are exactly the means of the
/// returned assignment.
template <typename T>
ClusterAssignment<T> kmeans(const MatrixX<T>& points, int k,
                            std::uint64_t seed, int max_iter = 300,
                            double tol = 1e-8) {
  const Index n = points.rows(), dim = points.cols();
  if (k < 1) throw InputError("k must be >= 1");
  if (n < k)
    throw InputError("kmeans needs at least k points, got " +
                     std::to_string(n) + " for k=" + std::to_string(k));
  if (max_iter < 1) throw InputError("max_iter must be >= 1");

  Rng rng(mix_seed(seed, 0x4B4D));
  MatrixX<T> centers(k, dim);
  centers.row(0) = points.row(
      static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> nearest(static_cast<std::size_t>(n),
                              std::numeric_limits<double>::infinity());
  for (int j = 1; j < k; ++j) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double d = static_cast<double>(
          (points.row(i) - centers.row(j - 1)).squaredNorm());
      auto& slot = nearest[static_cast<std::size_t>(i)];
      if (d < slot) slot = d;
      total += slot;
    }
    Index pick = n - 1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double cumulative = 0.0;
      for (Index i = 0; i < n; ++i) {
        cumulative += nearest[static_cast<std::size_t>(i)];
        if (r < cumulative) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.row(j) = points.row(pick);
  }

  ClusterAssignment<T> result;
  std::vector<int> assign(static_cast<std::size_t>(n), -1);
  std::vector<int> prev_assign;
  std::vector<double> dist_to_center(static_cast<std::size_t>(n), 0.0);
  double prev_inertia = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= max_iter; ++iter) {
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int j = 0; j < k; ++j) {
        const double d = static_cast<double>(
            (points.row(i) - centers.row(j)).squaredNorm());
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      assign[static_cast<std::size_t>(i)] = best;
      dist_to_center[static_cast<std::size_t>(i)] = best_d;
      ++counts[static_cast<std::size_t>(best)];
    }
    for (int e = 0; e < k; ++e) {
      if (counts[static_cast<std::size_t>(e)] > 0) continue;
      Index victim = -1;
      double worst = -1.0;
      for (Index i = 0; i < n; ++i) {
        const int owner = assign[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(owner)] < 2) continue;
        if (dist_to_center[static_cast<std::size_t>(i)] > worst) {
          worst = dist_to_center[static_cast<std::size_t>(i)];
          victim = i;
        }
      }
      if (victim < 0) throw InputError("cannot repair empty cluster");
      --counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(victim)])];
      assign[static_cast<std::size_t>(victim)] = e;
      ++counts[static_cast<std::size_t>(e)];
      centers.row(e) = points.row(victim);
      dist_to_center[static_cast<std::size_t>(victim)] = 0.0;
    }

    double inertia = 0.0;
    for (Index i = 0; i < n; ++i)
      inertia += static_cast<double>(
          (points.row(i) - centers.row(assign[static_cast<std::size_t>(i)]))
              .squaredNorm());
    result.inertia_trace.push_back(inertia);
    result.iterations = iter;

    // recenter to the means of the current assignment
    centers.setZero();
    for (Index i = 0; i < n; ++i)
      centers.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
    for (int j = 0; j < k; ++j)
      centers.row(j) /= static_cast<T>(counts[static_cast<std::size_t>(j)]);

    if (assign == prev_assign) break;
    if (iter >= 2 && prev_inertia - inertia < tol) break;
    prev_assign = assign;
    prev_inertia = inertia;
  }

  result.centers = std::move(centers);
  result.cluster_of.reserve(static_cast<std::size_t>(n));
  result.inertia = 0.0;
  for (Index i = 0; i < n; ++i) {
    const int c = assign[static_cast<std::size_t>(i)];
    result.cluster_of.push_back(c + 1);
    result.inertia += static_cast<double>(
        (points.row(i) - result.centers.row(c)).squaredNorm());
  }
  return result;
}

/// Chance-corrected agreement between two labelings of the same elements.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  if (a.empty() || a.size() != b.size())
    throw InputError("partitions must cover the same non-empty element set");
  std::map<std::pair<int, int>, long> cells;
  std::map<int, long> row_sums, col_sums;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++cells[{a[i], b[i]}];
    ++row_sums[a[i]];
    ++col_sums[b[i]];
  }
  auto comb2 = [](long x) {
    return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1);
  };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : cells) index += comb2(count);
  for (const auto& [key, count] : row_sums) sum_a += comb2(count);
  for (const auto& [key, count] : col_sums) sum_b += comb2(count);
  const double pairs = comb2(static_cast<long>(a.size()));
  const double expected = pairs > 0.0 ? sum_a * sum_b / pairs : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both partitions degenerate alike
  return (index - expected) / (max_index - expected);
}

/// Agreement (ARI) between two partitions of the 28 classes given as
/// per-class group ids.
inline double compare_partition(const std::vector<int>& a,
                                const std::vector<int>& b) {
  if (a.size() != b.size())
    throw InputError("partition coverage mismatch: " +
                     std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()) + " classes");
  for (int g : a)
    if (g < 1) throw InputError("invalid group id in partition");
  for (int g : b)
    if (g < 1) throw InputError("invalid group id in partition");
  return adjusted_rand_index(a, b);
}

/// The 13 master-stroke groups over the 28 classes; aeen keeps its own
/// group. Index = class id - 1, value = group id 1..13.
inline const std::array<int, kNumClasses>& reference_partition() {
  static const std::array<int, kNumClasses> groups = {
      1,   // alef
      2,   // baa
      2,   // taa
      2,   // thaa
      3,   // gem
      3,   // haa
      3,   // khaa
      4,   // dal
      4,   // zal
      5,   // raa
      5,   // zeen
      6,   // seen
      6,   // sheen
      7,   // saad
      7,   // daad
      8,   // taaa
      8,   // zaaa
      9,   // aeen
      9,   // gheen
      10,  // faa
      10,  // qaf
      11,  // kaf
      11,  // lam
      12,  // mem
      2,   // noon
      13,  // heh
      5,   // waw
      2    // yaa
  };
  return groups;
}

inline constexpr int kNumStrokeGroups = 13;

/// Representative (first-member) name per master-stroke group.
inline const std::array<std::string, kNumStrokeGroups>& stroke_group_names() {
  static const std::array<std::string, kNumStrokeGroups> names = {
      "alef", "baa", "gem", "dal", "raa", "seen", "saad",
      "taaa", "aeen", "faa", "kaf", "mem", "heh"};
  return names;
}

}  // namespace ahcr
