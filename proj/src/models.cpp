#include "driftloc/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftloc/random.hpp"

namespace driftloc {

namespace {

void check_dimension(int got, int want) {
  if (got != want)
    throw std::invalid_argument("predict_proba: input has dimension " +
                                std::to_string(got) + ", model expects " +
                                std::to_string(want));
}

Eigen::VectorXd smoothed_distribution(const std::vector<int>& counts, int n) {
  const int t = static_cast<int>(counts.size());
  Eigen::VectorXd dist(t);
  for (int c = 0; c < t; ++c)
    dist[c] = (counts[static_cast<std::size_t>(c)] + 1.0) / (n + t);
  return dist;
}

struct TreeBuilder {
  const Eigen::MatrixXd& features;
  const std::vector<int>& labels;
  int n_time_labels;
  TreeParams params;
  int mtry;
  std::uint64_t seed;
  std::vector<DecisionTree::Node> nodes;
  int n_leaves = 0;

  int build(std::vector<int>& indices, int depth) {
    const int node_index = static_cast<int>(nodes.size());
    nodes.emplace_back();
    nodes[static_cast<std::size_t>(node_index)].n_samples =
        static_cast<int>(indices.size());

    std::vector<int> counts(static_cast<std::size_t>(n_time_labels), 0);
    for (int i : indices) ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    const int n = static_cast<int>(indices.size());
    const bool pure =
        std::count(counts.begin(), counts.end(), 0) >= n_time_labels - 1;

    int best_feature = -1;
    double best_threshold = 0.0;
    if (depth < params.max_depth && n >= 2 * params.min_leaf_size && !pure)
      find_best_split(indices, counts, node_index, best_feature, best_threshold);

    if (best_feature < 0) {
      auto& leaf = nodes[static_cast<std::size_t>(node_index)];
      leaf.distribution = smoothed_distribution(counts, n);
      leaf.leaf_id = n_leaves++;
      return node_index;
    }

    std::vector<int> left, right;
    left.reserve(indices.size());
    right.reserve(indices.size());
    for (int i : indices) {
      if (features(i, best_feature) <= best_threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }
    indices.clear();
    indices.shrink_to_fit();

    nodes[static_cast<std::size_t>(node_index)].feature = best_feature;
    nodes[static_cast<std::size_t>(node_index)].threshold = best_threshold;
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    nodes[static_cast<std::size_t>(node_index)].left = l;
    nodes[static_cast<std::size_t>(node_index)].right = r;
    return node_index;
  }

  // Picks the split maximizing sum_c c_L^2/n_L + sum_c c_R^2/n_R (equivalent
  // to minimizing weighted Gini). Exact-score ties are broken uniformly at
  // random from a per-node stream, so the result depends only on the value
  // multisets, never on sample order.
  void find_best_split(const std::vector<int>& indices,
                       const std::vector<int>& total_counts, int node_index,
                       int& best_feature, double& best_threshold) {
    const int d = static_cast<int>(features.cols());
    Rng node_rng(derive_seed(seed, static_cast<std::uint64_t>(node_index)));

    std::vector<int> candidate_features;
    if (mtry >= d) {
      candidate_features.resize(static_cast<std::size_t>(d));
      std::iota(candidate_features.begin(), candidate_features.end(), 0);
    } else {
      std::vector<int> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), 0);
      for (int k = 0; k < mtry; ++k) {
        const auto j = k + static_cast<int>(node_rng.uniform_index(
                               static_cast<std::uint64_t>(d - k)));
        std::swap(all[static_cast<std::size_t>(k)], all[static_cast<std::size_t>(j)]);
      }
      candidate_features.assign(all.begin(), all.begin() + mtry);
      std::sort(candidate_features.begin(), candidate_features.end());
    }

    const int n = static_cast<int>(indices.size());
    double parent_score = 0.0;
    for (int c : total_counts)
      parent_score += static_cast<double>(c) * c / n;

    double best_score = parent_score;
    std::vector<std::pair<int, double>> ties;
    std::vector<std::pair<double, int>> column(indices.size());  // value, label
    std::vector<int> left_counts(static_cast<std::size_t>(n_time_labels));

    for (int f : candidate_features) {
      for (std::size_t r = 0; r < indices.size(); ++r) {
        const int i = indices[r];
        column[r] = {features(i, f), labels[static_cast<std::size_t>(i)]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::fill(left_counts.begin(), left_counts.end(), 0);
      int n_left = 0;
      for (int r = 0; r + 1 < n; ++r) {
        ++left_counts[static_cast<std::size_t>(column[static_cast<std::size_t>(r)].second)];
        ++n_left;
        if (column[static_cast<std::size_t>(r)].first ==
            column[static_cast<std::size_t>(r + 1)].first)
          continue;  // not a boundary between distinct values
        const int n_right = n - n_left;
        if (n_left < params.min_leaf_size || n_right < params.min_leaf_size)
          continue;
        double score = 0.0;
        for (int c = 0; c < n_time_labels; ++c) {
          const double cl = left_counts[static_cast<std::size_t>(c)];
          const double cr = total_counts[static_cast<std::size_t>(c)] - cl;
          score += cl * cl / n_left + cr * cr / n_right;
        }
        if (score > best_score) {
          best_score = score;
          ties.clear();
        }
        if (score == best_score && score > parent_score) {
          const double threshold =
              0.5 * (column[static_cast<std::size_t>(r)].first +
                     column[static_cast<std::size_t>(r + 1)].first);
          ties.emplace_back(f, threshold);
        }
      }
    }

    if (ties.empty()) return;
    std::size_t pick = 0;
    if (ties.size() > 1)
      pick = static_cast<std::size_t>(node_rng.uniform_index(ties.size()));
    best_feature = ties[pick].first;
    best_threshold = ties[pick].second;
  }
};

}  // namespace

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b) {
  return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left &&
         a.right == b.right && a.n_samples == b.n_samples && a.leaf_id == b.leaf_id &&
         a.distribution.size() == b.distribution.size() &&
         a.distribution == b.distribution;
}

const DecisionTree::Node& DecisionTree::find_leaf(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dimension(static_cast<int>(x.size()), dimension_);
  const Node* node = &nodes_[0];
  while (node->feature >= 0) {
    node = x[node->feature] <= node->threshold
               ? &nodes_[static_cast<std::size_t>(node->left)]
               : &nodes_[static_cast<std::size_t>(node->right)];
  }
  return *node;
}

TimePrior DecisionTree::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return {find_leaf(x).distribution};
}

int DecisionTree::leaf_id(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return find_leaf(x).leaf_id;
}

DecisionTree train_decision_tree_impl(const Eigen::MatrixXd& features,
                                      const std::vector<int>& labels,
                                      int n_time_labels, const TreeParams& params,
                                      int mtry, std::uint64_t seed) {
  if (features.rows() == 0)
    throw std::invalid_argument("train_decision_tree: empty dataset");
  TreeBuilder builder{features, labels, n_time_labels, params, mtry, seed, {}, 0};
  std::vector<int> all(static_cast<std::size_t>(features.rows()));
  std::iota(all.begin(), all.end(), 0);
  builder.build(all, 0);

  DecisionTree tree;
  tree.nodes_ = std::move(builder.nodes);
  tree.n_time_labels_ = n_time_labels;
  tree.dimension_ = static_cast<int>(features.cols());
  tree.n_leaves_ = builder.n_leaves;
  return tree;
}

DecisionTree train_decision_tree(const LabeledDataset& ds, const TreeParams& params,
                                 std::uint64_t seed) {
  return train_decision_tree_impl(ds.features(), ds.time_labels(),
                                  ds.n_time_labels(), params,
                                  ds.dimension(), seed);
}

TimePrior RandomForest::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dimension(static_cast<int>(x.size()), dimension_);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n_time_labels_);
  for (const auto& tree : trees_) sum += tree.predict_proba(x).probs;
  return {sum / static_cast<double>(trees_.size())};
}

bool RandomForest::oob_prediction(int i, Eigen::VectorXd& out) const {
  const int count = oob_counts_[static_cast<std::size_t>(i)];
  if (count == 0) return false;
  out = oob_sum_.row(i).transpose() / static_cast<double>(count);
  return true;
}

RandomForest train_random_forest(const LabeledDataset& ds, const ForestParams& params,
                                 std::uint64_t seed) {
  if (params.n_trees < 1)
    throw std::invalid_argument("train_random_forest: n_trees must be >= 1");
  const int n = ds.size();
  const int d = ds.dimension();
  const int mtry =
      params.feature_subsample > 0
          ? std::min(params.feature_subsample, d)
          : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));

  RandomForest forest;
  forest.n_time_labels_ = ds.n_time_labels();
  forest.dimension_ = d;
  forest.oob_sum_ = Eigen::MatrixXd::Zero(n, ds.n_time_labels());
  forest.oob_counts_.assign(static_cast<std::size_t>(n), 0);
  forest.trees_.reserve(static_cast<std::size_t>(params.n_trees));
  forest.in_bag_.reserve(static_cast<std::size_t>(params.n_trees));

  std::vector<bool> drawn(static_cast<std::size_t>(n));
  for (int t = 0; t < params.n_trees; ++t) {
    Rng boot_rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(t)));
    std::vector<int> in_bag(static_cast<std::size_t>(n));
    std::fill(drawn.begin(), drawn.end(), false);
    for (int k = 0; k < n; ++k) {
      const int i = static_cast<int>(boot_rng.uniform_index(static_cast<std::uint64_t>(n)));
      in_bag[static_cast<std::size_t>(k)] = i;
      drawn[static_cast<std::size_t>(i)] = true;
    }
    std::sort(in_bag.begin(), in_bag.end());

    const LabeledDataset bag = ds.subset(in_bag);
    const std::uint64_t tree_seed = derive_seed(seed, 2 * static_cast<std::uint64_t>(t) + 1);
    forest.trees_.push_back(train_decision_tree_impl(
        bag.features(), bag.time_labels(), bag.n_time_labels(), params.tree, mtry,
        tree_seed));
    const DecisionTree& tree = forest.trees_.back();
    for (int i = 0; i < n; ++i) {
      if (drawn[static_cast<std::size_t>(i)]) continue;
      forest.oob_sum_.row(i) += tree.predict_proba(ds.row(i).transpose()).probs.transpose();
      ++forest.oob_counts_[static_cast<std::size_t>(i)];
    }
    forest.in_bag_.push_back(std::move(in_bag));
  }
  return forest;
}

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits;
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    const double m = p.row(r).maxCoeff();
    p.row(r) = (p.row(r).array() - m).exp();
    p.row(r) /= p.row(r).sum();
  }
  return p;
}

}  // namespace

double mlp_loss_and_gradient(const MlpWeights& w, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, MlpWeights& grad) {
  const Eigen::Index b = x.rows();
  const Eigen::MatrixXd pre = (x * w.w1.transpose()).rowwise() + w.b1.transpose();
  const Eigen::MatrixXd hidden = pre.cwiseMax(0.0);
  const Eigen::MatrixXd logits = (hidden * w.w2.transpose()).rowwise() + w.b2.transpose();
  const Eigen::MatrixXd proba = softmax_rows(logits);

  double loss = 0.0;
  for (Eigen::Index r = 0; r < b; ++r)
    loss -= std::log(std::max(proba(r, y[static_cast<std::size_t>(r)]), 1e-300));
  loss /= static_cast<double>(b);

  Eigen::MatrixXd dlogits = proba;
  for (Eigen::Index r = 0; r < b; ++r) dlogits(r, y[static_cast<std::size_t>(r)]) -= 1.0;
  dlogits /= static_cast<double>(b);

  grad.w2 = dlogits.transpose() * hidden;
  grad.b2 = dlogits.colwise().sum().transpose();
  const Eigen::MatrixXd dhidden =
      (dlogits * w.w2).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  grad.w1 = dhidden.transpose() * x;
  grad.b1 = dhidden.colwise().sum().transpose();
  return loss;
}

TimePrior Mlp::predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  check_dimension(static_cast<int>(x.size()), dimension_);
  const Eigen::VectorXd z = (x - feature_mean_).cwiseQuotient(feature_scale_);
  const Eigen::VectorXd hidden = ((weights_.w1 * z) + weights_.b1).cwiseMax(0.0);
  Eigen::VectorXd logits = weights_.w2 * hidden + weights_.b2;
  const double m = logits.maxCoeff();
  Eigen::VectorXd p = (logits.array() - m).exp();
  p /= p.sum();
  return {p};
}

Mlp train_mlp(const LabeledDataset& ds, const MlpParams& params, std::uint64_t seed) {
  if (ds.size() == 0) throw std::invalid_argument("train_mlp: empty dataset");
  const int n = ds.size();
  const int d = ds.dimension();
  const int t = ds.n_time_labels();
  const int h = params.hidden_units;

  Mlp model;
  model.dimension_ = d;
  model.n_time_labels_ = t;
  model.feature_mean_ = ds.features().colwise().mean().transpose();
  const Eigen::MatrixXd centered =
      ds.features().rowwise() - model.feature_mean_.transpose();
  const Eigen::VectorXd var =
      centered.array().square().matrix().colwise().mean().transpose();
  model.feature_scale_ = var.array().sqrt().matrix();
  for (int j = 0; j < d; ++j)
    if (model.feature_scale_[j] == 0.0) model.feature_scale_[j] = 1.0;

  Rng rng(seed);
  MlpWeights& w = model.weights_;
  w.w1.resize(h, d);
  w.b1 = Eigen::VectorXd::Zero(h);
  w.w2.resize(t, h);
  w.b2 = Eigen::VectorXd::Zero(t);
  const double lim1 = std::sqrt(6.0 / (d + h));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < d; ++j) w.w1(i, j) = rng.uniform(-lim1, lim1);
  const double lim2 = std::sqrt(6.0 / (h + t));
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < h; ++j) w.w2(i, j) = rng.uniform(-lim2, lim2);

  Eigen::MatrixXd standardized = centered;
  for (int j = 0; j < d; ++j) standardized.col(j) /= model.feature_scale_[j];

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const int batch = std::max(1, params.batch_size);
  MlpWeights grad;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(order);
    for (int start = 0; start < n; start += batch) {
      const int b = std::min(batch, n - start);
      Eigen::MatrixXd xb(b, d);
      std::vector<int> yb(static_cast<std::size_t>(b));
      for (int r = 0; r < b; ++r) {
        const int i = order[static_cast<std::size_t>(start + r)];
        xb.row(r) = standardized.row(i);
        yb[static_cast<std::size_t>(r)] = ds.label(i);
      }
      mlp_loss_and_gradient(w, xb, yb, grad);
      w.w1 -= params.learning_rate * grad.w1;
      w.b1 -= params.learning_rate * grad.b1;
      w.w2 -= params.learning_rate * grad.w2;
      w.b2 -= params.learning_rate * grad.b2;
    }
  }
  return model;
}

}  // namespace driftloc
