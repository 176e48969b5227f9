#include "driftloc/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "driftloc/conformal.hpp"
#include "driftloc/parallel.hpp"
#include "driftloc/random.hpp"

namespace driftloc {

namespace {

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double kl = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    if (p[c] > 0.0) kl += p[c] * std::log(p[c] / q[c]);
  }
  return kl;
}

double entropy_nats(const std::vector<int>& counts, int total, int n_labels) {
  if (total == 0) return std::log(static_cast<double>(n_labels));
  double h = 0.0;
  for (int c : counts) {
    if (c == 0) continue;
    const double q = static_cast<double>(c) / total;
    h -= q * std::log(q);
  }
  return h;
}

struct KdqBuilder {
  const LabeledDataset& ds;
  KdqParams params;
  Eigen::VectorXd prior;
  std::vector<double> scores;

  void build(std::vector<int>& indices, Eigen::VectorXd lo, Eigen::VectorXd hi,
             int depth) {
    const int n = static_cast<int>(indices.size());
    if (n <= params.min_leaf_size || depth >= params.max_depth) {
      make_leaf(indices);
      return;
    }
    const int axis = depth % ds.dimension();
    const double mid = 0.5 * (lo[axis] + hi[axis]);
    std::vector<int> left, right;
    for (int i : indices) {
      (ds.features()(i, axis) <= mid ? left : right).push_back(i);
    }
    indices.clear();
    if (!left.empty()) {
      Eigen::VectorXd left_hi = hi;
      left_hi[axis] = mid;
      build(left, lo, left_hi, depth + 1);
    }
    if (!right.empty()) {
      Eigen::VectorXd right_lo = lo;
      right_lo[axis] = mid;
      build(right, right_lo, hi, depth + 1);
    }
  }

  void make_leaf(const std::vector<int>& indices) {
    const int t = ds.n_time_labels();
    std::vector<int> counts(static_cast<std::size_t>(t), 0);
    for (int i : indices) ++counts[static_cast<std::size_t>(ds.label(i))];
    Eigen::VectorXd dist(t);
    for (int c = 0; c < t; ++c)
      dist[c] = (counts[static_cast<std::size_t>(c)] + 1.0) /
                (static_cast<double>(indices.size()) + t);
    const double stat = kl_divergence(dist, prior);
    for (int i : indices) scores[static_cast<std::size_t>(i)] = stat;
  }
};

}  // namespace

LocalTestResult kdq_tree_localize(const LabeledDataset& ds, const KdqParams& params) {
  ds.validate();
  const int n = ds.size();
  KdqBuilder builder{ds, params, time_label_prior(ds).probs,
                     std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);
  builder.build(all, ds.features().colwise().minCoeff().transpose(),
                ds.features().colwise().maxCoeff().transpose(), 0);

  LocalTestResult result;
  result.values = std::move(builder.scores);
  result.orientation = ScoreOrientation::higher_is_drifting;
  result.assigned.assign(static_cast<std::size_t>(n), true);
  return result;
}

LocalTestResult ldd_dis_localize(const LabeledDataset& ds, const LddParams& params,
                                 std::uint64_t seed) {
  ds.validate();
  if (ds.n_time_labels() != 2)
    throw std::invalid_argument("ldd_dis_localize: requires a two-window dataset");
  const int n = ds.size();
  const int k = params.k > 0 ? params.k : std::min(20, n / 5);
  if (k < 1 || k >= n)
    throw std::invalid_argument("ldd_dis_localize: need 1 <= k < n");

  // Pairwise squared distances; neighbor order resolves distance ties by index.
  const Eigen::MatrixXd& x = ds.features();
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * (x * x.transpose())).colwise() + sq;
  d2.rowwise() += sq.transpose();

  std::vector<std::vector<int>> neighbors(static_cast<std::size_t>(n));
  std::vector<std::pair<double, int>> row(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = {d2(i, j), j};
    row[static_cast<std::size_t>(i)].first = std::numeric_limits<double>::infinity();
    std::partial_sort(row.begin(), row.begin() + k, row.end());
    auto& nn = neighbors[static_cast<std::size_t>(i)];
    nn.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) nn[static_cast<std::size_t>(j)] = row[static_cast<std::size_t>(j)].second;
  }

  int w0 = 0;
  for (int y : ds.time_labels()) w0 += (y == 0) ? 1 : 0;
  const int w1 = n - w0;

  const auto abs_delta = [&](const std::vector<int>& labels, int i) {
    int k2 = 0;
    for (int j : neighbors[static_cast<std::size_t>(i)])
      k2 += labels[static_cast<std::size_t>(j)];
    const int k1 = k - k2;
    const double delta =
        ((k2 + 1.0) / w1) / ((k1 + 1.0) / w0) - 1.0;
    return std::abs(delta);
  };

  std::vector<double> observed(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) observed[static_cast<std::size_t>(i)] = abs_delta(ds.time_labels(), i);

  LocalTestResult result;
  result.orientation = ScoreOrientation::higher_is_drifting;
  result.assigned.assign(static_cast<std::size_t>(n), true);
  if (params.n_resample <= 0) {
    result.values = std::move(observed);
    return result;
  }

  std::vector<int> below(static_cast<std::size_t>(n), 0);
  std::vector<int> permuted = ds.time_labels();
  Rng rng(seed);
  for (int r = 0; r < params.n_resample; ++r) {
    rng.shuffle(permuted);
    for (int i = 0; i < n; ++i) {
      if (abs_delta(permuted, i) < observed[static_cast<std::size_t>(i)])
        ++below[static_cast<std::size_t>(i)];
    }
  }
  result.values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    result.values[static_cast<std::size_t>(i)] =
        static_cast<double>(below[static_cast<std::size_t>(i)]) / params.n_resample;
  return result;
}

LocalTestResult mbdl_permutation_localize(const LabeledDataset& ds,
                                          const MbdlParams& params, std::uint64_t seed,
                                          int jobs) {
  ds.validate();
  if (params.n_boot < 1 || params.n_perm < 1)
    throw std::invalid_argument("mbdl_permutation_localize: n_boot, n_perm >= 1");
  const int n = ds.size();
  const int t = ds.n_time_labels();

  Rng rng(seed);
  std::vector<BootstrapSplit> splits;
  splits.reserve(static_cast<std::size_t>(params.n_boot));
  for (int b = 0; b < params.n_boot; ++b) splits.push_back(sample_bootstrap(n, rng));

  struct Slot {
    std::vector<int> indices;
    std::vector<double> p_values;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(params.n_boot));

  parallel_for(params.n_boot, jobs, [&](int b) {
    const BootstrapSplit& split = splits[static_cast<std::size_t>(b)];
    const LabeledDataset bag = ds.subset(split.in_bag);
    const DecisionTree tree = train_decision_tree_impl(
        bag.features(), bag.time_labels(), t, params.tree, ds.dimension(),
        derive_seed(seed, 2 * static_cast<std::uint64_t>(b)));

    const int n_leaves = tree.n_leaves();
    std::vector<int> leaf_of_oob(split.oob.size());
    std::vector<std::vector<int>> leaf_counts(
        static_cast<std::size_t>(n_leaves), std::vector<int>(static_cast<std::size_t>(t), 0));
    std::vector<int> leaf_totals(static_cast<std::size_t>(n_leaves), 0);
    std::vector<int> oob_labels(split.oob.size());
    for (std::size_t j = 0; j < split.oob.size(); ++j) {
      const int i = split.oob[j];
      const int leaf = tree.leaf_id(ds.row(i).transpose());
      leaf_of_oob[j] = leaf;
      oob_labels[j] = ds.label(i);
      ++leaf_counts[static_cast<std::size_t>(leaf)][static_cast<std::size_t>(ds.label(i))];
      ++leaf_totals[static_cast<std::size_t>(leaf)];
    }

    std::vector<double> observed(static_cast<std::size_t>(n_leaves));
    for (int l = 0; l < n_leaves; ++l)
      observed[static_cast<std::size_t>(l)] = entropy_nats(
          leaf_counts[static_cast<std::size_t>(l)], leaf_totals[static_cast<std::size_t>(l)], t);

    // Null: shuffle the OOB labels, leaf membership fixed, entropy per leaf.
    std::vector<int> count_le(static_cast<std::size_t>(n_leaves), 0);
    std::vector<int> shuffled = oob_labels;
    Rng perm_rng(derive_seed(seed, 2 * static_cast<std::uint64_t>(b) + 1));
    std::vector<std::vector<int>> null_counts = leaf_counts;
    for (int r = 0; r < params.n_perm; ++r) {
      perm_rng.shuffle(shuffled);
      for (auto& c : null_counts) std::fill(c.begin(), c.end(), 0);
      for (std::size_t j = 0; j < shuffled.size(); ++j)
        ++null_counts[static_cast<std::size_t>(leaf_of_oob[j])]
                     [static_cast<std::size_t>(shuffled[j])];
      for (int l = 0; l < n_leaves; ++l) {
        const double h = entropy_nats(null_counts[static_cast<std::size_t>(l)],
                                      leaf_totals[static_cast<std::size_t>(l)], t);
        if (h <= observed[static_cast<std::size_t>(l)])
          ++count_le[static_cast<std::size_t>(l)];
      }
    }

    Slot& slot = slots[static_cast<std::size_t>(b)];
    int prev = -1;
    for (int i : split.in_bag) {
      if (i == prev) continue;
      prev = i;
      const int leaf = tree.leaf_id(ds.row(i).transpose());
      slot.indices.push_back(i);
      slot.p_values.push_back((1.0 + count_le[static_cast<std::size_t>(leaf)]) /
                              (1.0 + params.n_perm));
    }
  });

  std::vector<std::vector<double>> per_sample(static_cast<std::size_t>(n));
  for (const Slot& slot : slots) {
    for (std::size_t j = 0; j < slot.indices.size(); ++j)
      per_sample[static_cast<std::size_t>(slot.indices[j])].push_back(slot.p_values[j]);
  }

  LocalTestResult result;
  result.orientation = ScoreOrientation::lower_is_drifting;
  result.values.assign(static_cast<std::size_t>(n),
                       std::numeric_limits<double>::quiet_NaN());
  result.assigned.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n; ++i) {
    const auto& list = per_sample[static_cast<std::size_t>(i)];
    if (list.empty()) continue;
    result.values[static_cast<std::size_t>(i)] = median_aggregate(list);
    result.assigned[static_cast<std::size_t>(i)] = true;
  }
  return result;
}

LocalTestResult rf_heuristic_localize(const LabeledDataset& ds,
                                      const RfHeurParams& params, std::uint64_t seed) {
  ds.validate();
  ForestParams forest_params;
  forest_params.n_trees = params.n_trees;
  forest_params.tree = params.tree;
  const RandomForest forest = train_random_forest(ds, forest_params, seed);
  const Eigen::VectorXd prior = time_label_prior(ds).probs;

  const int n = ds.size();
  LocalTestResult result;
  result.orientation = ScoreOrientation::higher_is_drifting;
  result.assigned.assign(static_cast<std::size_t>(n), true);
  result.values.assign(static_cast<std::size_t>(n), 0.0);
  Eigen::VectorXd oob;
  for (int i = 0; i < n; ++i) {
    if (!forest.oob_prediction(i, oob)) continue;  // never OOB: score stays 0
    result.values[static_cast<std::size_t>(i)] = 0.5 * (oob - prior).cwiseAbs().sum();
  }
  return result;
}

}  // namespace driftloc
