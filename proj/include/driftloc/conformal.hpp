#ifndef DRIFTLOC_CONFORMAL_HPP
#define DRIFTLOC_CONFORMAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "driftloc/models.hpp"
#include "driftloc/random.hpp"

namespace driftloc {

/// One bootstrap resample of {0,...,n-1}: n draws with replacement (sorted,
/// multiplicity kept) and the complementary out-of-bag set.
struct BootstrapSplit {
  std::vector<int> in_bag;  // size n, sorted, with multiplicity
  std::vector<int> oob;     // sorted, indices absent from in_bag
};

/// Draws one bootstrap split. Requires n >= 2. The expected unique in-bag
/// fraction tends to 1 - 1/e (~0.632) as n grows.
BootstrapSplit sample_bootstrap(int n, Rng& rng);

/// Draws pool_factor * n_boot candidate splits, then greedily keeps n_boot of
/// them: each step takes the candidate that maximizes the resulting minimum
/// per-sample in-bag count, ties resolved by candidate order. This is the
/// subset selection that keeps the number of times each sample is assigned a
/// p-value from lagging behind the bootstrap count.
std::vector<BootstrapSplit> select_coverage_maximizing_bootstraps(int n, int n_boot,
                                                                  int pool_factor,
                                                                  Rng& rng);

/// Rank-based conformal p-value: (1 + #{cal <= test}) / (1 + #cal), in (0, 1].
/// An empty calibration list forces 1.0.
double conformal_p_value(std::span<const double> calibration_scores, double test_score);

/// Per-label calibration scores harvested from a model's predictions on an
/// out-of-bag (or held-out) subset; scores[c] holds f(c | x_k) for the subset
/// members with label c, sorted ascending.
class ClasswiseCalibration {
 public:
  ClasswiseCalibration(const ProbabilisticModel& model, const LabeledDataset& ds,
                       std::span<const int> calibration_indices);

  /// p-value for one label given the test sample's predicted distribution.
  double p_value_for_label(const TimePrior& proba, int label) const;

  /// min over labels of p_value_for_label; the drift p-value of one sample
  /// under one calibrated model.
  double min_class_p_value(const TimePrior& proba) const;

  int n_calibration(int label) const {
    return static_cast<int>(scores_[static_cast<std::size_t>(label)].size());
  }

 private:
  std::vector<std::vector<double>> scores_;
};

/// Convenience form: builds the calibration from the subset and scores x.
double min_class_p_value(const ProbabilisticModel& model, const LabeledDataset& ds,
                         std::span<const int> calibration_indices,
                         const Eigen::Ref<const Eigen::VectorXd>& x);

/// Lower median: the k-th smallest with k = ceil(|values| / 2). For odd
/// lengths this is the usual middle value. The lower convention makes
/// "aggregated p < alpha" coincide exactly with "at least half of the
/// per-bootstrap tests reject at alpha".
double median_aggregate(std::span<const double> values);

/// Per-sample p-value bookkeeping across bootstraps. aggregated[i] is the
/// lower median of per_sample[i] when assigned[i], and NaN otherwise
/// (samples that were never in-bag).
struct PValueTable {
  std::vector<std::vector<double>> per_sample;
  std::vector<double> aggregated;
  std::vector<bool> assigned;

  int n_assigned() const;
};

/// Fills aggregated/assigned from the per-sample lists.
void aggregate_p_value_table(PValueTable& table);

enum class CpModelKind { decision_tree, mlp };

struct CPConfig {
  int n_boot = 100;
  int bootstrap_pool_factor = 10;
  CpModelKind model_kind = CpModelKind::decision_tree;
  TreeParams tree;
  MlpParams mlp;
  std::uint64_t seed = 0;
};

/// Bootstrap-calibrated conformal drift localization. For each selected
/// bootstrap: trains the configured model on the in-bag samples (duplicates
/// included), calibrates per label on the out-of-bag samples, and assigns the
/// min-class conformal p-value to every unique in-bag sample. Per-sample
/// lists are aggregated by lower median. Bit-reproducible for a fixed seed,
/// independent of the number of worker threads.
PValueTable cp_drift_localization(const LabeledDataset& ds, const CPConfig& config,
                                  int jobs = 1);

/// Split-conformal variant: one random partition, model trained on a
/// split_fraction share of the data, calibration on the rest, p-values
/// assigned to the training-part samples only.
PValueTable split_conformal_localization(const LabeledDataset& ds, double split_fraction,
                                         CpModelKind model_kind, const TreeParams& tree,
                                         const MlpParams& mlp, std::uint64_t seed);

}  // namespace driftloc

#endif
