#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "ahcr/rng.hpp"
#include "ahcr/svm.hpp"
#include "doctest.h"

using ahcr::Index;
using ahcr::Rng;
using ahcr::SvmModel;
using ahcr::SvmTrainConfig;
using ahcr::Tensor;

namespace {

// 20 jittered copies of two anchor points, one per class.
std::pair<Tensor<double>, std::vector<int>> toy_separable(Rng& rng) {
  const Index n = 40;
  Tensor<double> x = Tensor<double>::uninit({n, 2});
  std::vector<int> labels;
  for (Index i = 0; i < n; ++i) {
    const bool first = i < 20;
    const double jx = 0.15 * rng.normal();
    const double jy = 0.15 * rng.normal();
    x.at(i, 0) = (first ? 0.0 : 1.0) + jx;
    x.at(i, 1) = (first ? 1.0 : 0.0) + jy;
    labels.push_back(first ? 1 : 2);
  }
  return {std::move(x), std::move(labels)};
}

// Exhaustive grid search for a separating line, the existence oracle for
// the toy problem.
bool grid_separator_exists(const Tensor<double>& x,
                           const std::vector<int>& labels) {
  for (double w0 = -2.0; w0 <= 2.0; w0 += 0.25)
    for (double w1 = -2.0; w1 <= 2.0; w1 += 0.25)
      for (double b = -2.0; b <= 2.0; b += 0.25) {
        bool ok = true;
        for (Index i = 0; i < x.dim(0) && ok; ++i) {
          const double s = w0 * x.at(i, 0) + w1 * x.at(i, 1) + b;
          const double t = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
          if (t * s <= 0.0) ok = false;
        }
        if (ok) return true;
      }
  return false;
}

}  // namespace

TEST_CASE("toy separable set reaches 100% train accuracy with dropout 0") {
  Rng rng(101);
  auto [x, labels] = toy_separable(rng);
  REQUIRE(grid_separator_exists(x, labels));

  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.learning_rate = 0.05;
  cfg.epochs = 100;
  cfg.seed = 5;
  auto model = ahcr::svm_train(x, labels, cfg);
  auto predictions = ahcr::svm_predict(model, x);
  for (std::size_t i = 0; i < labels.size(); ++i)
    CHECK(predictions[i] == labels[i]);
}

TEST_CASE("a model with all margins beyond 1 only feels the regularizer") {
  // W = 0, own-class bias +2, rivals -2: every binary hinge is inactive,
  // so one full-batch step moves nothing (the lambda term scales W = 0).
  const Index dim = 6;
  Tensor<double> x = Tensor<double>::uninit({1, dim});
  for (Index j = 0; j < dim; ++j) x[j] = 0.3 * (j + 1);
  std::vector<int> labels = {3};

  auto start = ahcr::make_svm_model<double>(28, dim);
  for (Index c = 0; c < 28; ++c) start.bias[c] = (c == 2) ? 2.0 : -2.0;

  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.learning_rate = 0.5;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  auto model = ahcr::svm_train(x, labels, cfg, 28, &start);
  CHECK(ahcr::max_abs_diff(model.weights, start.weights) == 0.0);
  CHECK(ahcr::max_abs_diff(model.bias, start.bias) == 0.0);
}

TEST_CASE("svm_scores basics and oracle agreement") {
  auto model = ahcr::make_svm_model<double>(4, 5);
  auto x = Tensor<double>::full({2, 5}, 0.7);
  auto zero_scores = ahcr::svm_scores(model, x);
  CHECK(ahcr::sum(zero_scores) == 0.0);

  Rng rng(7);
  for (Index i = 0; i < model.weights.size(); ++i)
    model.weights[i] = rng.normal();
  for (Index i = 0; i < model.bias.size(); ++i) model.bias[i] = rng.normal();

  // one-hot input selects a weight column (identity standardization)
  auto onehot = Tensor<double>::zeros({1, 5});
  onehot.at(0, 3) = 1.0;
  auto s = ahcr::svm_scores(model, onehot);
  for (Index c = 0; c < 4; ++c)
    CHECK(s.at(0, c) == doctest::Approx(model.weights.at(c, 3) + model.bias[c])
                            .epsilon(1e-15));

  // triple-loop oracle, exact at 64-bit
  auto xs = Tensor<double>::uninit({3, 5});
  for (Index i = 0; i < xs.size(); ++i) xs[i] = rng.normal();
  auto scores = ahcr::svm_scores(model, xs);
  for (Index i = 0; i < 3; ++i)
    for (Index c = 0; c < 4; ++c) {
      double acc = model.bias[c];
      for (Index j = 0; j < 5; ++j) acc += model.weights.at(c, j) * xs.at(i, j);
      CHECK(scores.at(i, c) == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("svm_scores rejects mismatched feature width") {
  auto model = ahcr::make_svm_model<float>(28, 1024);
  auto x = Tensor<float>::zeros({1, 100});
  CHECK_THROWS_AS(ahcr::svm_scores(model, x), ahcr::ShapeError);
}

TEST_CASE("svm_predict picks the peak and breaks ties low") {
  auto model = ahcr::make_svm_model<double>(6, 3);
  model.bias[4] = 5.0;
  auto x = Tensor<double>::zeros({1, 3});
  CHECK(ahcr::svm_predict(model, x) == std::vector<int>{5});

  auto flat = ahcr::make_svm_model<double>(6, 3);
  CHECK(ahcr::svm_predict(flat, x) == std::vector<int>{1});
}

TEST_CASE("prediction agrees with the argmax of scores") {
  Rng rng(11);
  auto model = ahcr::make_svm_model<double>(9, 12);
  for (Index i = 0; i < model.weights.size(); ++i)
    model.weights[i] = rng.normal();
  auto x = Tensor<double>::uninit({20, 12});
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  auto scores = ahcr::svm_scores(model, x);
  auto predictions = ahcr::svm_predict(model, x);
  for (Index i = 0; i < 20; ++i) {
    Index best = 0;
    for (Index c = 1; c < 9; ++c)
      if (scores.at(i, c) > scores.at(i, best)) best = c;
    CHECK(predictions[static_cast<std::size_t>(i)] ==
          static_cast<int>(best) + 1);
  }
}

TEST_CASE("prediction is invariant under positive score rescaling") {
  Rng rng(13);
  auto model = ahcr::make_svm_model<double>(5, 8);
  for (Index i = 0; i < model.weights.size(); ++i)
    model.weights[i] = rng.normal();
  for (Index i = 0; i < model.bias.size(); ++i) model.bias[i] = rng.normal();
  auto x = Tensor<double>::uninit({15, 8});
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();

  auto scaled = model;
  scaled.weights.flat() *= 7.5;
  scaled.bias.flat() *= 7.5;
  CHECK(ahcr::svm_predict(model, x) == ahcr::svm_predict(scaled, x));
}

TEST_CASE("huge regularization collapses predictions to the tie-break class") {
  // weights shrink toward 0 as lambda grows
  Rng rng(17);
  Tensor<double> x = Tensor<double>::uninit({8, 4});
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  std::vector<int> labels = {1, 2, 1, 2, 1, 2, 1, 2};
  auto norm_for_lambda = [&](double lambda) {
    SvmTrainConfig cfg;
    cfg.dropout_rate = 0.0;
    cfg.reg_lambda = lambda;
    cfg.learning_rate = 1e-4;
    cfg.epochs = 400;
    cfg.batch_size = 8;
    auto model = ahcr::svm_train(x, labels, cfg, 28);
    return static_cast<double>(model.weights.flat().cwiseAbs().maxCoeff());
  };
  const double loose = norm_for_lambda(1.0);
  const double tight = norm_for_lambda(1e3);
  CHECK(tight < 1e-3);
  CHECK(tight < 0.02 * loose);

  // with label-ambiguous data the separators for classes 1 and 2 see a
  // zero subgradient, scores tie exactly, and the lowest id wins
  Tensor<double> ambiguous = Tensor<double>::uninit({4, 4});
  for (Index j = 0; j < 4; ++j) {
    ambiguous.at(0, j) = 0.3 * (j + 1);
    ambiguous.at(1, j) = 0.3 * (j + 1);
    ambiguous.at(2, j) = -0.2 * (j + 2);
    ambiguous.at(3, j) = -0.2 * (j + 2);
  }
  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.reg_lambda = 1e3;
  cfg.learning_rate = 1e-4;
  cfg.epochs = 300;
  cfg.batch_size = 4;
  auto model = ahcr::svm_train(ambiguous, {1, 2, 1, 2}, cfg, 28);
  auto predictions = ahcr::svm_predict(model, ambiguous);
  for (int p : predictions) CHECK(p == 1);
}

TEST_CASE("28 orthogonal singletons train to 100% accuracy") {
  Tensor<double> x = Tensor<double>::zeros({28, 28});
  std::vector<int> labels;
  for (Index i = 0; i < 28; ++i) {
    x.at(i, i) = 1.0;
    labels.push_back(static_cast<int>(i) + 1);
  }
  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.learning_rate = 0.05;
  cfg.epochs = 60;
  auto model = ahcr::svm_train(x, labels, cfg);
  auto predictions = ahcr::svm_predict(model, x);
  for (std::size_t i = 0; i < labels.size(); ++i)
    CHECK(predictions[i] == labels[i]);
}

TEST_CASE("full-batch objective is monotone for a small learning rate") {
  Rng rng(19);
  const Index n = 10, dim = 4;
  Tensor<double> x = Tensor<double>::uninit({n, dim});
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.normal();
  std::vector<int> labels;
  for (Index i = 0; i < n; ++i)
    labels.push_back(1 + static_cast<int>(i) % 3);

  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.0;
  cfg.learning_rate = 1e-3;
  cfg.epochs = 1;
  cfg.batch_size = static_cast<int>(n);

  auto model = ahcr::svm_train(x, labels, cfg, 3);
  double prev = ahcr::svm_objective(model, x, labels);
  for (int step = 0; step < 100; ++step) {
    model = ahcr::svm_train(x, labels, cfg, 3, &model);
    const double now = ahcr::svm_objective(model, x, labels);
    CHECK(now <= prev + 1e-12);
    prev = now;
  }
}

TEST_CASE("dropout perturbs presentations but predictions stay clean") {
  Rng rng(23);
  auto [x, labels] = toy_separable(rng);
  SvmTrainConfig cfg;
  cfg.dropout_rate = 0.5;
  cfg.learning_rate = 0.02;
  cfg.epochs = 150;
  cfg.seed = 31;
  auto model = ahcr::svm_train(x, labels, cfg);
  auto predictions = ahcr::svm_predict(model, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (predictions[i] == labels[i]) ++correct;
  CHECK(correct == labels.size());
}

TEST_CASE("input validation") {
  SvmTrainConfig cfg;
  auto x = Tensor<double>::zeros({2, 3});
  CHECK_THROWS_AS(ahcr::svm_train(x, {1, 99}, cfg), ahcr::InputError);
  CHECK_THROWS_AS(ahcr::svm_train(x, {1}, cfg), ahcr::InputError);
  cfg.dropout_rate = 1.0;
  CHECK_THROWS_AS(ahcr::svm_train(x, {1, 2}, cfg), ahcr::InputError);
}

TEST_CASE("training is deterministic in the seed") {
  Rng rng(29);
  auto [x, labels] = toy_separable(rng);
  SvmTrainConfig cfg;
  cfg.seed = 77;
  auto a = ahcr::svm_train(x, labels, cfg);
  auto b = ahcr::svm_train(x, labels, cfg);
  CHECK(ahcr::max_abs_diff(a.weights, b.weights) == 0.0);
  CHECK(ahcr::max_abs_diff(a.bias, b.bias) == 0.0);
}
