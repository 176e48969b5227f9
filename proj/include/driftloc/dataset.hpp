#ifndef DRIFTLOC_DATASET_HPP
#define DRIFTLOC_DATASET_HPP

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace driftloc {

/// Distribution over time labels. Entries are nonnegative and sum to 1
/// (within 1e-12 for anything produced by this library).
struct TimePrior {
  Eigen::VectorXd probs;

  bool is_valid(double tol = 1e-12) const;
};

/// One observation: a feature vector plus its (discretized) observation time.
struct Sample {
  Eigen::VectorXd features;
  int time_label = 0;
};

/// Per-sample drift ground truth, aligned with dataset order.
struct DriftGroundTruth {
  std::vector<bool> is_drifting;

  std::size_t size() const { return is_drifting.size(); }
  int n_drifting() const;
};

/// A static two-window (generally: finite-time-label) snapshot. Features are
/// stored row-per-sample; sample identity is the row index, which is stable
/// for the lifetime of the dataset.
///
/// Validated datasets (from make_window_pair, the generators, or the CSV
/// loader) carry no NaN/infinity, have every label in {0,...,n_time_labels-1}
/// present, and share one feature dimension. Resampled views built with
/// subset() skip the every-label-present check on purpose: bootstrap draws
/// can lose a label, and downstream code has to cope with that.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  LabeledDataset(Eigen::MatrixXd features, std::vector<int> time_labels,
                 int n_time_labels);

  int size() const { return static_cast<int>(features_.rows()); }
  int dimension() const { return static_cast<int>(features_.cols()); }
  int n_time_labels() const { return n_time_labels_; }

  const Eigen::MatrixXd& features() const { return features_; }
  const std::vector<int>& time_labels() const { return time_labels_; }

  Eigen::MatrixXd::ConstRowXpr row(int i) const { return features_.row(i); }
  int label(int i) const { return time_labels_[static_cast<std::size_t>(i)]; }

  Sample sample(int i) const { return {features_.row(i).transpose(), label(i)}; }

  /// New dataset with the given rows, multiplicity allowed. The label-presence
  /// invariant is intentionally not re-checked (see class comment).
  LabeledDataset subset(std::span<const int> indices) const;

  /// Throws std::invalid_argument if any validated-dataset invariant fails.
  void validate() const;

 private:
  Eigen::MatrixXd features_;       // n x d
  std::vector<int> time_labels_;   // size n, values in [0, n_time_labels)
  int n_time_labels_ = 0;
};

/// Stacks a before window (label 0) and an after window (label 1) into one
/// dataset, before rows first. Both windows must be nonempty and share the
/// feature dimension.
LabeledDataset make_window_pair(const Eigen::MatrixXd& before,
                                const Eigen::MatrixXd& after);

/// Empirical distribution of time labels: probs[c] = count(label == c) / n.
TimePrior time_label_prior(const LabeledDataset& ds);

}  // namespace driftloc

#endif
