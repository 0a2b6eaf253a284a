#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "enose/baselines.hpp"
#include "enose/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace enose;

namespace {

std::vector<FlatExample> random_examples(int n, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FlatExample> out(static_cast<std::size_t>(n));
  for (auto& ex : out) {
    ex.x.resize(d);
    for (int i = 0; i < d; ++i) ex.x[i] = rng.normal(0.0, 1.0);
    ex.label = label_from_index(static_cast<int>(rng.below(3)));
  }
  return out;
}

// Three well-separated Gaussian blobs.
std::vector<FlatExample> blob_examples(int per_class, int d, std::uint64_t seed,
                                       double spread = 0.3) {
  Rng rng(seed);
  std::vector<FlatExample> out;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      FlatExample ex;
      ex.label = label_from_index(c);
      ex.x = Vec::Zero(d);
      ex.x[c % d] = 3.0;
      for (int k = 0; k < d; ++k) ex.x[k] += rng.normal(0.0, spread);
      out.push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace

TEST_CASE("knn basics") {
  const auto train = blob_examples(5, 4, 1);
  const KnnModel one = knn_fit(train, {1});
  for (const auto& ex : train) CHECK(knn_predict(one, ex.x) == ex.label);

  // k = n with counts (2,1,1): majority wins
  std::vector<FlatExample> tiny;
  for (int i = 0; i < 2; ++i) tiny.push_back({Vec::Constant(2, i * 0.1), GasLabel::H2});
  tiny.push_back({Vec::Constant(2, 5.0), GasLabel::CO});
  tiny.push_back({Vec::Constant(2, 6.0), GasLabel::Mix});
  const KnnModel all = knn_fit(tiny, {4});
  CHECK(knn_predict(all, Vec::Constant(2, 0.0)) == GasLabel::H2);

  CHECK_THROWS_AS((void)knn_fit({}, {1}), std::invalid_argument);
  CHECK_THROWS_AS((void)knn_fit(tiny, {5}), std::invalid_argument);
  CHECK_THROWS_AS((void)knn_fit(tiny, {0}), std::invalid_argument);
}

TEST_CASE("knn vote ties resolve to the smallest class index") {
  std::vector<FlatExample> train;
  train.push_back({Vec::Constant(1, 1.0), GasLabel::Mix});
  train.push_back({Vec::Constant(1, -1.0), GasLabel::CO});
  const KnnModel model = knn_fit(train, {2});
  CHECK(knn_predict(model, Vec::Constant(1, 0.0)) == GasLabel::CO);
}

TEST_CASE("knn matches a brute-force scan on random data") {
  const auto train = random_examples(120, 6, 3);
  const KnnModel model = knn_fit(train, {5});
  Rng rng(4);
  for (int q = 0; q < 200; ++q) {
    Vec query(6);
    for (int i = 0; i < 6; ++i) query[i] = rng.normal(0.0, 1.5);

    // oracle: full stable sort by (distance, index), then majority/min-index
    std::vector<std::pair<double, int>> dist;
    for (std::size_t i = 0; i < train.size(); ++i) {
      dist.push_back({(train[i].x - query).norm(), static_cast<int>(i)});
    }
    std::stable_sort(dist.begin(), dist.end());
    std::array<int, 3> votes{};
    for (int i = 0; i < 5; ++i) {
      votes[static_cast<std::size_t>(class_index(
          train[static_cast<std::size_t>(dist[static_cast<std::size_t>(i)].second)].label))]++;
    }
    int best = 0;
    for (int c = 1; c < 3; ++c) {
      if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
    }
    CHECK(knn_predict(model, query) == label_from_index(best));
  }
}

TEST_CASE("gini impurity") {
  CHECK(gini_impurity({2, 2, 0}) == 0.5);
  CHECK(gini_impurity({4, 0, 0}) == 0.0);
  CHECK(gini_impurity({0, 0, 0}) == 0.0);
  CHECK(gini_impurity({1, 1, 1}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("single unbagged tree shatters distinct points") {
  const auto train = random_examples(40, 5, 7);
  RfConfig cfg;
  cfg.n_trees = 1;
  cfg.bootstrap = false;
  cfg.seed = 7;
  const RfModel model = rf_fit(train, cfg);
  int correct = 0;
  for (const auto& ex : train) correct += rf_predict(model, ex.x) == ex.label ? 1 : 0;
  CHECK(correct == static_cast<int>(train.size()));
}

TEST_CASE("pure training data yields a single-leaf answer") {
  auto train = random_examples(12, 4, 9);
  for (auto& ex : train) ex.label = GasLabel::CO;
  const RfModel model = rf_fit(train, {});
  Rng rng(10);
  for (int q = 0; q < 20; ++q) {
    Vec query(4);
    for (int i = 0; i < 4; ++i) query[i] = rng.normal(0.0, 2.0);
    CHECK(rf_predict(model, query) == GasLabel::CO);
  }
}

TEST_CASE("every tree is pure on its own bootstrap sample") {
  const auto train = random_examples(60, 8, 11);
  RfConfig cfg;
  cfg.n_trees = 25;
  cfg.seed = 11;
  const RfModel model = rf_fit(train, cfg);
  REQUIRE(model.bootstrap_indices.size() == 25);
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    for (const int idx : model.bootstrap_indices[t]) {
      const auto& ex = train[static_cast<std::size_t>(idx)];
      CHECK(rf_tree_predict(model.trees[t], ex.x) == ex.label);
    }
  }
}

TEST_CASE("forest training is deterministic in the seed") {
  const auto train = blob_examples(15, 6, 13);
  RfConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = 99;
  const RfModel a = rf_fit(train, cfg);
  const RfModel b = rf_fit(train, cfg);
  REQUIRE(a.trees.size() == b.trees.size());
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
    for (std::size_t n = 0; n < a.trees[t].nodes.size(); ++n) {
      CHECK(a.trees[t].nodes[n].feature == b.trees[t].nodes[n].feature);
      CHECK(a.trees[t].nodes[n].threshold == b.trees[t].nodes[n].threshold);
    }
  }
}

TEST_CASE("linear svm separates separable clusters perfectly") {
  const auto train = blob_examples(20, 5, 17);
  SvmConfig cfg;
  cfg.epochs = 300;
  const SvmModel model = svm_fit(train, cfg);
  int correct = 0;
  for (const auto& ex : train) correct += svm_predict(model, ex.x) == ex.label ? 1 : 0;
  CHECK(correct == static_cast<int>(train.size()));
}

TEST_CASE("svm with one label present predicts it on the training region") {
  auto train = random_examples(20, 4, 19);
  for (auto& ex : train) ex.label = GasLabel::Mix;
  const SvmModel model = svm_fit(train, {});
  for (const auto& ex : train) CHECK(svm_predict(model, ex.x) == GasLabel::Mix);
}

TEST_CASE("positive rescaling of decision weights keeps the argmax") {
  const auto train = blob_examples(10, 4, 23);
  SvmModel model = svm_fit(train, {});
  SvmModel scaled = model;
  scaled.weights *= 7.5;
  scaled.bias *= 7.5;
  Rng rng(24);
  for (int q = 0; q < 50; ++q) {
    Vec query(4);
    for (int i = 0; i < 4; ++i) query[i] = rng.normal(0.0, 2.0);
    CHECK(svm_predict(model, query) == svm_predict(scaled, query));
  }
}

TEST_CASE("svm training is deterministic") {
  const auto train = blob_examples(12, 5, 29);
  const SvmModel a = svm_fit(train, {});
  const SvmModel b = svm_fit(train, {});
  CHECK((a.weights.array() == b.weights.array()).all());
  CHECK((a.bias.array() == b.bias.array()).all());
}
