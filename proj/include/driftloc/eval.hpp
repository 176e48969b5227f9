#ifndef DRIFTLOC_EVAL_HPP
#define DRIFTLOC_EVAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "driftloc/data.hpp"
#include "driftloc/methods.hpp"

namespace driftloc {

/// ROC-AUC with higher = more drifting and no missing entries: the
/// probability that a random drifting sample outranks a random non-drifting
/// one, ties counting one half (Mann-Whitney U, normalized). Requires at
/// least one sample of each class.
double roc_auc(std::span<const double> drift_scores, const std::vector<bool>& truth);

/// Orientation-aware form: p-values are flipped to 1 - p, unassigned samples
/// are dropped before ranking.
double roc_auc(const LocalTestResult& result, const DriftGroundTruth& truth);

/// Data source for an experiment: a seeded generator or a fixed CSV file.
struct DataSpec {
  enum class Kind { class_swap, no_drift, csv };
  Kind kind = Kind::class_swap;
  ClassSwapSpec class_swap;
  int no_drift_n = 200;
  int no_drift_d = 5;
  std::string csv_path;
};

/// Instantiates the data source; generator specs use the given seed, CSV data
/// is as-is (and must carry a drift column when ground truth is required).
std::pair<LabeledDataset, DriftGroundTruth> materialize_data(const DataSpec& spec,
                                                             std::uint64_t seed);

struct ExperimentConfig {
  MethodSpec method;
  DataSpec data;
  int n_repetitions = 500;
  std::uint64_t seed = 0;
};

struct RepetitionResult {
  double auc = 0.0;
  int n_evaluated = 0;
  int n_excluded = 0;
};

struct ResultTable {
  std::vector<RepetitionResult> reps;
  double mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Interpolated quantile (the linear "type 7" convention) of unsorted values.
double quantile(std::vector<double> values, double q);

/// Repeats generate-localize-score n_repetitions times with per-repetition
/// seeds derived from the master seed. Samples the method never assigned a
/// value are excluded from the AUC. The table is ordered by repetition index
/// and bit-identical for a fixed seed, regardless of the worker count.
ResultTable run_experiment(const ExperimentConfig& config, int jobs = 1);

struct SweepPoint {
  double grid_value = 0.0;
  double median_auc = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Runs the experiment once per bootstrap count. Data seeds are shared across
/// grid points (paired design), so curves differ only through the method.
std::vector<SweepPoint> bootstrap_sweep(const ExperimentConfig& config,
                                        const std::vector<int>& n_boot_grid,
                                        int jobs = 1);

/// Same pairing for the split-conformal train/calibration fraction.
std::vector<SweepPoint> split_size_sweep(const ExperimentConfig& config,
                                         const std::vector<double>& fraction_grid,
                                         int jobs = 1);

}  // namespace driftloc

#endif
