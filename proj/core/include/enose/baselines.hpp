#pragma once

#include "enose/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace enose {

struct FlatExample {
  Vec x;
  GasLabel label = GasLabel::H2;
};

struct KnnConfig {
  int k = 5;
};

struct KnnModel {
  KnnConfig cfg;
  std::vector<Vec> points;
  std::vector<GasLabel> labels;
};

KnnModel knn_fit(const std::vector<FlatExample>& train, const KnnConfig& cfg);

// Majority label among the k Euclidean-nearest points. Equidistant neighbors
// rank by training index; vote ties pick the smallest class index.
GasLabel knn_predict(const KnnModel& model, const Vec& query);

struct RfConfig {
  int n_trees = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 42;
};

struct RfNode {
  int feature = -1;      // -1 for leaves
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  GasLabel leaf = GasLabel::H2;
};

struct RfTree {
  std::vector<RfNode> nodes;  // node 0 is the root
};

struct RfModel {
  RfConfig cfg;
  std::vector<RfTree> trees;
  std::vector<std::vector<int>> bootstrap_indices;  // per tree, empty when bootstrap off
};

// CART with Gini splits over sqrt(d) feature candidates per node, grown until
// pure or below min_split.
RfModel rf_fit(const std::vector<FlatExample>& train, const RfConfig& cfg);
GasLabel rf_predict(const RfModel& model, const Vec& x);
GasLabel rf_tree_predict(const RfTree& tree, const Vec& x);

// 1 - sum p_i^2
double gini_impurity(const std::array<std::int64_t, kNumClasses>& counts);

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 200;
};

// One-vs-rest linear machines trained by deterministic full-batch
// subgradient descent on the hinge loss, eta_t = 1/(lambda*t).
struct SvmModel {
  Mat weights;  // 3 x d
  Vec bias;     // 3
};

SvmModel svm_fit(const std::vector<FlatExample>& train, const SvmConfig& cfg);
Vec svm_decision(const SvmModel& model, const Vec& x);
GasLabel svm_predict(const SvmModel& model, const Vec& x);

}  // namespace enose
