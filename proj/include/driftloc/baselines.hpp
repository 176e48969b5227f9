#ifndef DRIFTLOC_BASELINES_HPP
#define DRIFTLOC_BASELINES_HPP

#include <cstdint>
#include <vector>

#include "driftloc/dataset.hpp"
#include "driftloc/models.hpp"

namespace driftloc {

enum class ScoreOrientation {
  higher_is_drifting,  // raw drift scores
  lower_is_drifting,   // p-values
};

/// Per-sample output of a localizer. `values` are scores or p-values per the
/// orientation flag; `assigned` marks samples the method actually evaluated
/// (methods that score every sample leave it all-true).
struct LocalTestResult {
  std::vector<double> values;
  ScoreOrientation orientation = ScoreOrientation::higher_is_drifting;
  std::vector<bool> assigned;

  /// Score with higher = more drifting, regardless of orientation.
  double drift_score(int i) const {
    const double v = values[static_cast<std::size_t>(i)];
    return orientation == ScoreOrientation::higher_is_drifting ? v : 1.0 - v;
  }
};

struct KdqParams {
  int min_leaf_size = 10;
  int max_depth = 20;
};

/// kdq-tree localizer: recursively halves the data bounding box along
/// round-robin axes (splits are data-independent given the root box), then
/// scores each leaf by the KL divergence between its Laplace-smoothed
/// time-label distribution and the global prior. Every sample inherits its
/// leaf's statistic.
LocalTestResult kdq_tree_localize(const LabeledDataset& ds, const KdqParams& params);

struct LddParams {
  int k = 0;  // 0 = min(20, n/5)
  int n_resample = 100;
};

/// LDD-DIS style localizer for two-window data. For each sample the local
/// drift degree is the smoothed window-frequency ratio of its k nearest
/// neighbors minus one; |delta| is normalized against a permutation null
/// (fraction of null values strictly below the observed one). With
/// n_resample = 0 the raw |delta| is returned.
LocalTestResult ldd_dis_localize(const LabeledDataset& ds, const LddParams& params,
                                 std::uint64_t seed);

struct MbdlParams {
  int n_boot = 100;
  int n_perm = 100;
  TreeParams tree;
};

/// Model-based localizer: per bootstrap, a decision tree trained on the
/// in-bag samples groups the data by leaf; the statistic of an in-bag sample
/// is the entropy of the out-of-bag time labels in its leaf (maximal entropy
/// = no drift evidence), normalized by permuting the out-of-bag labels.
/// Per-bootstrap p-values are combined by lower median; samples never in-bag
/// are left unassigned.
LocalTestResult mbdl_permutation_localize(const LabeledDataset& ds,
                                          const MbdlParams& params, std::uint64_t seed,
                                          int jobs = 1);

struct RfHeurParams {
  int n_trees = 100;
  TreeParams tree;
};

/// Random-forest heuristic: total-variation distance between a sample's
/// out-of-bag averaged predicted time distribution and the global prior.
/// Samples with no out-of-bag prediction get score 0.
LocalTestResult rf_heuristic_localize(const LabeledDataset& ds,
                                      const RfHeurParams& params, std::uint64_t seed);

}  // namespace driftloc

#endif
