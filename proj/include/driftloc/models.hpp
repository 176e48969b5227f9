#ifndef DRIFTLOC_MODELS_HPP
#define DRIFTLOC_MODELS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "driftloc/dataset.hpp"

namespace driftloc {

enum class ModelKind { decision_tree, random_forest, mlp };

/// A trained scoring function over time labels. predict_proba always returns
/// a proper distribution (nonnegative, sums to 1 within 1e-9) for inputs of
/// the trained dimension. Trained models are immutable and safe to share
/// across threads.
class ProbabilisticModel {
 public:
  virtual ~ProbabilisticModel() = default;
  virtual ModelKind kind() const = 0;
  virtual int n_time_labels() const = 0;
  virtual int dimension() const = 0;
  virtual TimePrior predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const = 0;
};

struct TreeParams {
  int max_depth = 5;
  int min_leaf_size = 5;
};

/// Greedy binary CART over time labels, Gini impurity, split candidates at
/// midpoints between consecutive distinct sorted feature values. Leaves hold
/// Laplace-smoothed label distributions (count_c + 1)/(n_leaf + |T|), so
/// every entry is strictly positive. The seed is consumed only to break
/// exact-gain ties between candidate splits (and, inside forests, to draw the
/// per-node feature subset), which makes training invariant to sample order.
class DecisionTree : public ProbabilisticModel {
 public:
  struct Node {
    int feature = -1;          // -1 marks a leaf
    double threshold = 0.0;    // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    int n_samples = 0;
    int leaf_id = -1;          // unique among leaves, preorder
    Eigen::VectorXd distribution;  // leaves only, Laplace-smoothed
  };

  ModelKind kind() const override { return ModelKind::decision_tree; }
  int n_time_labels() const override { return n_time_labels_; }
  int dimension() const override { return dimension_; }
  TimePrior predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

  /// Index of the leaf x falls into.
  int leaf_id(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  int n_leaves() const { return n_leaves_; }

  const std::vector<Node>& nodes() const { return nodes_; }

  friend DecisionTree train_decision_tree_impl(const Eigen::MatrixXd&,
                                               const std::vector<int>&, int,
                                               const TreeParams&, int,
                                               std::uint64_t);

 private:
  const Node& find_leaf(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  std::vector<Node> nodes_;
  int n_time_labels_ = 0;
  int dimension_ = 0;
  int n_leaves_ = 0;
};

bool operator==(const DecisionTree::Node& a, const DecisionTree::Node& b);

/// Trains a CART on the dataset. Works on resampled datasets where some label
/// may be absent; smoothing keeps the absent label's leaf mass positive.
DecisionTree train_decision_tree(const LabeledDataset& ds, const TreeParams& params,
                                 std::uint64_t seed);

/// Low-level trainer: mtry = number of features considered per split
/// (mtry >= d means all, in which case no feature-subset randomness is drawn).
DecisionTree train_decision_tree_impl(const Eigen::MatrixXd& features,
                                      const std::vector<int>& labels,
                                      int n_time_labels, const TreeParams& params,
                                      int mtry, std::uint64_t seed);

struct ForestParams {
  int n_trees = 100;
  TreeParams tree;
  int feature_subsample = 0;  // 0 = floor(sqrt(d)), otherwise explicit count
};

/// Bagged CART trees with per-split feature subsampling. predict_proba is the
/// mean of the tree leaf distributions. Out-of-bag predictions (mean over
/// trees whose internal bootstrap excluded the sample) are cached at train
/// time; samples that were in-bag for every tree have none.
class RandomForest : public ProbabilisticModel {
 public:
  ModelKind kind() const override { return ModelKind::random_forest; }
  int n_time_labels() const override { return n_time_labels_; }
  int dimension() const override { return dimension_; }
  TimePrior predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

  int n_trees() const { return static_cast<int>(trees_.size()); }
  const DecisionTree& tree(int t) const { return trees_[static_cast<std::size_t>(t)]; }
  const std::vector<int>& tree_in_bag(int t) const {
    return in_bag_[static_cast<std::size_t>(t)];
  }

  /// OOB-averaged distribution for training sample i, or false if the sample
  /// was in-bag for every tree (caller decides the fallback).
  bool oob_prediction(int i, Eigen::VectorXd& out) const;
  int oob_count(int i) const { return oob_counts_[static_cast<std::size_t>(i)]; }

  friend RandomForest train_random_forest(const LabeledDataset&, const ForestParams&,
                                          std::uint64_t);

 private:
  std::vector<DecisionTree> trees_;
  std::vector<std::vector<int>> in_bag_;  // per tree, sorted with multiplicity
  Eigen::MatrixXd oob_sum_;               // n x |T|, sum of OOB tree predictions
  std::vector<int> oob_counts_;
  int n_time_labels_ = 0;
  int dimension_ = 0;
};

RandomForest train_random_forest(const LabeledDataset& ds, const ForestParams& params,
                                 std::uint64_t seed);

struct MlpParams {
  int hidden_units = 64;
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 32;
};

/// Weights of the one-hidden-layer network; exposed so the gradient can be
/// checked against finite differences.
struct MlpWeights {
  Eigen::MatrixXd w1;  // hidden x d
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // |T| x hidden
  Eigen::VectorXd b2;  // |T|
};

/// Mean cross-entropy of softmax(w2 * relu(w1 x + b1) + b2) over the batch,
/// plus analytic gradients with the same shapes as the weights.
double mlp_loss_and_gradient(const MlpWeights& w, const Eigen::MatrixXd& x,
                             const std::vector<int>& y, MlpWeights& grad);

/// Single-hidden-layer rectifier network with a softmax head, trained by
/// mini-batch gradient descent on cross-entropy. Inputs are standardized
/// per feature with statistics fitted on the training set and stored here.
class Mlp : public ProbabilisticModel {
 public:
  ModelKind kind() const override { return ModelKind::mlp; }
  int n_time_labels() const override { return n_time_labels_; }
  int dimension() const override { return dimension_; }
  TimePrior predict_proba(const Eigen::Ref<const Eigen::VectorXd>& x) const override;

  const MlpWeights& weights() const { return weights_; }

  friend Mlp train_mlp(const LabeledDataset&, const MlpParams&, std::uint64_t);

 private:
  MlpWeights weights_;
  Eigen::VectorXd feature_mean_;
  Eigen::VectorXd feature_scale_;  // stddev, constant features pinned to 1
  int n_time_labels_ = 0;
  int dimension_ = 0;
};

Mlp train_mlp(const LabeledDataset& ds, const MlpParams& params, std::uint64_t seed);

}  // namespace driftloc

#endif
