#include "driftloc/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace driftloc {

bool TimePrior::is_valid(double tol) const {
  if (probs.size() == 0) return false;
  double sum = 0.0;
  for (Eigen::Index c = 0; c < probs.size(); ++c) {
    if (!(probs[c] >= 0.0 && probs[c] <= 1.0)) return false;
    sum += probs[c];
  }
  return std::abs(sum - 1.0) <= tol;
}

int DriftGroundTruth::n_drifting() const {
  int k = 0;
  for (bool b : is_drifting) k += b ? 1 : 0;
  return k;
}

LabeledDataset::LabeledDataset(Eigen::MatrixXd features,
                               std::vector<int> time_labels, int n_time_labels)
    : features_(std::move(features)),
      time_labels_(std::move(time_labels)),
      n_time_labels_(n_time_labels) {
  if (features_.rows() != static_cast<Eigen::Index>(time_labels_.size()))
    throw std::invalid_argument("LabeledDataset: feature rows != label count");
  if (n_time_labels_ < 1)
    throw std::invalid_argument("LabeledDataset: n_time_labels must be >= 1");
  for (int y : time_labels_) {
    if (y < 0 || y >= n_time_labels_)
      throw std::invalid_argument("LabeledDataset: time label " +
                                  std::to_string(y) + " out of range");
  }
}

LabeledDataset LabeledDataset::subset(std::span<const int> indices) const {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> labels(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int i = indices[r];
    if (i < 0 || i >= size())
      throw std::out_of_range("LabeledDataset::subset: index out of range");
    f.row(static_cast<Eigen::Index>(r)) = features_.row(i);
    labels[r] = time_labels_[static_cast<std::size_t>(i)];
  }
  return LabeledDataset(std::move(f), std::move(labels), n_time_labels_);
}

void LabeledDataset::validate() const {
  if (size() == 0) throw std::invalid_argument("dataset is empty");
  if (!features_.allFinite())
    throw std::invalid_argument("dataset contains NaN or infinite features");
  std::vector<int> counts(static_cast<std::size_t>(n_time_labels_), 0);
  for (int y : time_labels_) ++counts[static_cast<std::size_t>(y)];
  for (int c = 0; c < n_time_labels_; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw std::invalid_argument("time label " + std::to_string(c) +
                                  " never occurs in dataset");
  }
}

LabeledDataset make_window_pair(const Eigen::MatrixXd& before,
                                const Eigen::MatrixXd& after) {
  if (before.rows() == 0 || after.rows() == 0)
    throw std::invalid_argument("make_window_pair: empty window");
  if (before.cols() != after.cols())
    throw std::invalid_argument(
        "make_window_pair: dimension mismatch (" +
        std::to_string(before.cols()) + " vs " + std::to_string(after.cols()) + ")");
  const Eigen::Index n0 = before.rows(), n1 = after.rows();
  Eigen::MatrixXd f(n0 + n1, before.cols());
  f.topRows(n0) = before;
  f.bottomRows(n1) = after;
  std::vector<int> labels(static_cast<std::size_t>(n0 + n1), 0);
  for (Eigen::Index i = n0; i < n0 + n1; ++i) labels[static_cast<std::size_t>(i)] = 1;
  LabeledDataset ds(std::move(f), std::move(labels), 2);
  ds.validate();
  return ds;
}

TimePrior time_label_prior(const LabeledDataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("time_label_prior: empty dataset");
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(ds.n_time_labels());
  for (int y : ds.time_labels()) probs[y] += 1.0;
  probs /= static_cast<double>(ds.size());
  return {probs};
}

}  // namespace driftloc
