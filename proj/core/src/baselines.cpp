#include "enose/baselines.hpp"

#include "enose/parallel.hpp"
#include "enose/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace enose {

namespace {

GasLabel majority_label(const std::array<std::int64_t, kNumClasses>& votes) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = c;
  }
  return label_from_index(best);  // scan keeps the smallest index on ties
}

}  // namespace

KnnModel knn_fit(const std::vector<FlatExample>& train, const KnnConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("knn_fit: empty training set");
  if (cfg.k < 1) throw std::invalid_argument("knn_fit: k must be >= 1");
  if (cfg.k > static_cast<int>(train.size())) {
    throw std::invalid_argument("knn_fit: k exceeds training set size");
  }
  KnnModel model;
  model.cfg = cfg;
  for (const auto& ex : train) {
    model.points.push_back(ex.x);
    model.labels.push_back(ex.label);
  }
  return model;
}

GasLabel knn_predict(const KnnModel& model, const Vec& query) {
  const auto n = model.points.size();
  std::vector<std::pair<double, int>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    dist[i] = {(model.points[i] - query).squaredNorm(), static_cast<int>(i)};
  }
  const auto k = static_cast<std::size_t>(model.cfg.k);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::array<std::int64_t, kNumClasses> votes{};
  for (std::size_t i = 0; i < k; ++i) {
    votes[static_cast<std::size_t>(class_index(model.labels[static_cast<std::size_t>(
        dist[i].second)]))] += 1;
  }
  return majority_label(votes);
}

double gini_impurity(const std::array<std::int64_t, kNumClasses>& counts) {
  const double total = static_cast<double>(counts[0] + counts[1] + counts[2]);
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (const auto c : counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

struct TreeBuilder {
  const std::vector<FlatExample>& data;
  const RfConfig& cfg;
  int n_features;
  int n_candidates;
  Rng rng;
  RfTree tree;

  std::array<std::int64_t, kNumClasses> count_labels(const std::vector<int>& idx) const {
    std::array<std::int64_t, kNumClasses> counts{};
    for (const int i : idx) {
      counts[static_cast<std::size_t>(class_index(data[static_cast<std::size_t>(i)].label))] += 1;
    }
    return counts;
  }

  int make_leaf(const std::array<std::int64_t, kNumClasses>& counts) {
    RfNode node;
    node.leaf = majority_label(counts);
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
  }

  // Feature candidates are drawn per node, without replacement.
  std::vector<int> draw_candidates() {
    std::vector<int> features(static_cast<std::size_t>(n_features));
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < n_candidates; ++i) {
      const auto j = i + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(n_features - i)));
      std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
    }
    features.resize(static_cast<std::size_t>(n_candidates));
    return features;
  }

  int build(std::vector<int> idx, int depth) {
    const auto counts = count_labels(idx);
    const bool pure = gini_impurity(counts) == 0.0;
    if (pure || static_cast<int>(idx.size()) < cfg.min_split ||
        (cfg.max_depth > 0 && depth >= cfg.max_depth)) {
      return make_leaf(counts);
    }

    double best_score = std::numeric_limits<double>::infinity();
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<int> sorted = idx;
    for (const int f : draw_candidates()) {
      std::sort(sorted.begin(), sorted.end(), [&](int a, int b) {
        const double va = data[static_cast<std::size_t>(a)].x[f];
        const double vb = data[static_cast<std::size_t>(b)].x[f];
        return va < vb || (va == vb && a < b);
      });
      std::array<std::int64_t, kNumClasses> left{};
      auto right = counts;
      const auto n = static_cast<double>(idx.size());
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto cls = static_cast<std::size_t>(
            class_index(data[static_cast<std::size_t>(sorted[i])].label));
        left[cls] += 1;
        right[cls] -= 1;
        const double va = data[static_cast<std::size_t>(sorted[i])].x[f];
        const double vb = data[static_cast<std::size_t>(sorted[i + 1])].x[f];
        if (va == vb) continue;
        const double nl = static_cast<double>(i + 1);
        const double score = (nl * gini_impurity(left) + (n - nl) * gini_impurity(right)) / n;
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = va + 0.5 * (vb - va);
        }
      }
    }
    if (best_feature < 0) return make_leaf(counts);  // all candidates constant

    std::vector<int> left_idx, right_idx;
    for (const int i : idx) {
      (data[static_cast<std::size_t>(i)].x[best_feature] <= best_threshold ? left_idx : right_idx)
          .push_back(i);
    }
    if (left_idx.empty() || right_idx.empty()) return make_leaf(counts);

    RfNode node;
    node.feature = best_feature;
    node.threshold = best_threshold;
    tree.nodes.push_back(node);
    const int self = static_cast<int>(tree.nodes.size()) - 1;
    const int left_child = build(std::move(left_idx), depth + 1);
    const int right_child = build(std::move(right_idx), depth + 1);
    tree.nodes[static_cast<std::size_t>(self)].left = left_child;
    tree.nodes[static_cast<std::size_t>(self)].right = right_child;
    return self;
  }
};

}  // namespace

RfModel rf_fit(const std::vector<FlatExample>& train, const RfConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("rf_fit: empty training set");
  if (cfg.n_trees < 1) throw std::invalid_argument("rf_fit: n_trees must be >= 1");
  if (cfg.min_split < 2) throw std::invalid_argument("rf_fit: min_split must be >= 2");
  const int n = static_cast<int>(train.size());
  const int d = static_cast<int>(train.front().x.size());
  const int candidates =
      std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));

  RfModel model;
  model.cfg = cfg;
  model.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  model.bootstrap_indices.resize(static_cast<std::size_t>(cfg.n_trees));
  parallel_for(static_cast<std::size_t>(cfg.n_trees), [&](std::size_t t) {
    Rng rng = derive_rng(cfg.seed, rng_tag::kTree, t);
    std::vector<int> idx(static_cast<std::size_t>(n));
    if (cfg.bootstrap) {
      for (auto& i : idx) i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      model.bootstrap_indices[t] = idx;
    } else {
      std::iota(idx.begin(), idx.end(), 0);
    }
    TreeBuilder builder{train, cfg, d, candidates, rng, {}};
    builder.build(std::move(idx), 0);
    model.trees[t] = std::move(builder.tree);
  });
  return model;
}

GasLabel rf_tree_predict(const RfTree& tree, const Vec& x) {
  int node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].feature >= 0) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    node = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].leaf;
}

GasLabel rf_predict(const RfModel& model, const Vec& x) {
  std::array<std::int64_t, kNumClasses> votes{};
  for (const auto& tree : model.trees) {
    votes[static_cast<std::size_t>(class_index(rf_tree_predict(tree, x)))] += 1;
  }
  return majority_label(votes);
}

SvmModel svm_fit(const std::vector<FlatExample>& train, const SvmConfig& cfg) {
  if (train.empty()) throw std::invalid_argument("svm_fit: empty training set");
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("svm_fit: lambda must be > 0");
  if (cfg.epochs < 1) throw std::invalid_argument("svm_fit: epochs must be >= 1");
  const auto n = train.size();
  const int d = static_cast<int>(train.front().x.size());

  SvmModel model;
  model.weights = Mat::Zero(kNumClasses, d);
  model.bias = Vec::Zero(kNumClasses);
  const double radius = 1.0 / std::sqrt(cfg.lambda);

  // Pegasos with a fixed cyclic sample order: eta_t = 1/(lambda*t) over
  // per-sample steps, bias as an augmented regularized coordinate, projection
  // onto the 1/sqrt(lambda) ball. No RNG, so training is deterministic.
  for (int c = 0; c < kNumClasses; ++c) {
    Vec w = Vec::Zero(d);
    double b = 0.0;
    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& ex = train[i];
        step += 1;
        const double eta = 1.0 / (cfg.lambda * static_cast<double>(step));
        const double y = class_index(ex.label) == c ? 1.0 : -1.0;
        const bool violated = y * (w.dot(ex.x) + b) < 1.0;
        const double keep = 1.0 - eta * cfg.lambda;
        w *= keep;
        b *= keep;
        if (violated) {
          w += (eta * y) * ex.x;
          b += eta * y;
        }
        const double norm = std::sqrt(w.squaredNorm() + b * b);
        if (norm > radius) {
          const double shrink = radius / norm;
          w *= shrink;
          b *= shrink;
        }
      }
    }
    model.weights.row(c) = w.transpose();
    model.bias[c] = b;
  }
  return model;
}

Vec svm_decision(const SvmModel& model, const Vec& x) { return model.weights * x + model.bias; }

GasLabel svm_predict(const SvmModel& model, const Vec& x) {
  const Vec scores = svm_decision(model, x);
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (scores[c] > scores[best]) best = c;
  }
  return label_from_index(best);
}

}  // namespace enose
