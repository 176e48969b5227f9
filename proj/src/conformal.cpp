#include "driftloc/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "driftloc/parallel.hpp"

namespace driftloc {

BootstrapSplit sample_bootstrap(int n, Rng& rng) {
  if (n < 2) throw std::invalid_argument("sample_bootstrap: n must be >= 2");
  BootstrapSplit split;
  split.in_bag.resize(static_cast<std::size_t>(n));
  std::vector<bool> drawn(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n; ++k) {
    const int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    split.in_bag[static_cast<std::size_t>(k)] = i;
    drawn[static_cast<std::size_t>(i)] = true;
  }
  std::sort(split.in_bag.begin(), split.in_bag.end());
  for (int i = 0; i < n; ++i)
    if (!drawn[static_cast<std::size_t>(i)]) split.oob.push_back(i);
  return split;
}

namespace {

// Bitmask of unique in-bag membership, one word per 64 samples.
std::vector<std::uint64_t> in_bag_mask(const BootstrapSplit& split, int n) {
  std::vector<std::uint64_t> mask(static_cast<std::size_t>((n + 63) / 64), 0);
  for (int i : split.in_bag)
    mask[static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64);
  return mask;
}

}  // namespace

std::vector<BootstrapSplit> select_coverage_maximizing_bootstraps(int n, int n_boot,
                                                                  int pool_factor,
                                                                  Rng& rng) {
  if (n_boot < 1)
    throw std::invalid_argument("select_coverage_maximizing_bootstraps: n_boot >= 1");
  if (pool_factor < 1)
    throw std::invalid_argument("select_coverage_maximizing_bootstraps: pool_factor >= 1");
  const int pool_size = n_boot * pool_factor;
  std::vector<BootstrapSplit> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  std::vector<std::vector<std::uint64_t>> masks;
  masks.reserve(static_cast<std::size_t>(pool_size));
  for (int c = 0; c < pool_size; ++c) {
    pool.push_back(sample_bootstrap(n, rng));
    masks.push_back(in_bag_mask(pool.back(), n));
  }

  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  std::vector<bool> taken(static_cast<std::size_t>(pool_size), false);
  std::vector<BootstrapSplit> selected;
  selected.reserve(static_cast<std::size_t>(n_boot));
  const std::size_t n_words = masks[0].size();

  for (int step = 0; step < n_boot; ++step) {
    const int current_min = *std::min_element(counts.begin(), counts.end());
    // Samples sitting at the current minimum; a candidate raises the minimum
    // iff its in-bag set covers all of them (counts grow by at most 1 a step).
    std::vector<std::uint64_t> min_set(n_words, 0);
    for (int i = 0; i < n; ++i) {
      if (counts[static_cast<std::size_t>(i)] == current_min)
        min_set[static_cast<std::size_t>(i) / 64] |= std::uint64_t{1} << (i % 64);
    }
    int chosen = -1;
    int first_free = -1;
    for (int c = 0; c < pool_size; ++c) {
      if (taken[static_cast<std::size_t>(c)]) continue;
      if (first_free < 0) first_free = c;
      bool covers = true;
      for (std::size_t w = 0; w < n_words; ++w) {
        if (min_set[w] & ~masks[static_cast<std::size_t>(c)][w]) {
          covers = false;
          break;
        }
      }
      if (covers) {
        chosen = c;
        break;
      }
    }
    if (chosen < 0) chosen = first_free;  // nothing can raise the minimum: tie
    taken[static_cast<std::size_t>(chosen)] = true;
    for (int i = 0; i < n; ++i) {
      if (masks[static_cast<std::size_t>(chosen)][static_cast<std::size_t>(i) / 64] &
          (std::uint64_t{1} << (i % 64)))
        ++counts[static_cast<std::size_t>(i)];
    }
    selected.push_back(std::move(pool[static_cast<std::size_t>(chosen)]));
  }
  return selected;
}

double conformal_p_value(std::span<const double> calibration_scores, double test_score) {
  int count = 0;
  for (double s : calibration_scores)
    if (s <= test_score) ++count;
  return (1.0 + count) / (1.0 + static_cast<double>(calibration_scores.size()));
}

ClasswiseCalibration::ClasswiseCalibration(const ProbabilisticModel& model,
                                           const LabeledDataset& ds,
                                           std::span<const int> calibration_indices)
    : scores_(static_cast<std::size_t>(model.n_time_labels())) {
  for (int k : calibration_indices) {
    const TimePrior proba = model.predict_proba(ds.row(k).transpose());
    scores_[static_cast<std::size_t>(ds.label(k))].push_back(proba.probs[ds.label(k)]);
  }
  for (auto& s : scores_) std::sort(s.begin(), s.end());
}

double ClasswiseCalibration::p_value_for_label(const TimePrior& proba, int label) const {
  const auto& cal = scores_[static_cast<std::size_t>(label)];
  const double test = proba.probs[label];
  const auto count =
      std::upper_bound(cal.begin(), cal.end(), test) - cal.begin();
  return (1.0 + static_cast<double>(count)) / (1.0 + static_cast<double>(cal.size()));
}

double ClasswiseCalibration::min_class_p_value(const TimePrior& proba) const {
  double p = 1.0;
  for (std::size_t c = 0; c < scores_.size(); ++c)
    p = std::min(p, p_value_for_label(proba, static_cast<int>(c)));
  return p;
}

double min_class_p_value(const ProbabilisticModel& model, const LabeledDataset& ds,
                         std::span<const int> calibration_indices,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  const ClasswiseCalibration calibration(model, ds, calibration_indices);
  return calibration.min_class_p_value(model.predict_proba(x));
}

double median_aggregate(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median_aggregate: empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

int PValueTable::n_assigned() const {
  int k = 0;
  for (bool b : assigned) k += b ? 1 : 0;
  return k;
}

void aggregate_p_value_table(PValueTable& table) {
  const std::size_t n = table.per_sample.size();
  table.aggregated.assign(n, std::numeric_limits<double>::quiet_NaN());
  table.assigned.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (table.per_sample[i].empty()) continue;
    table.aggregated[i] = median_aggregate(table.per_sample[i]);
    table.assigned[i] = true;
  }
}

namespace {

std::unique_ptr<ProbabilisticModel> train_cp_model(const LabeledDataset& bag,
                                                   const CPConfig& config,
                                                   std::uint64_t seed) {
  if (config.model_kind == CpModelKind::decision_tree)
    return std::make_unique<DecisionTree>(train_decision_tree(bag, config.tree, seed));
  return std::make_unique<Mlp>(train_mlp(bag, config.mlp, seed));
}

}  // namespace

PValueTable cp_drift_localization(const LabeledDataset& ds, const CPConfig& config,
                                  int jobs) {
  if (config.n_boot < 1)
    throw std::invalid_argument("cp_drift_localization: n_boot must be >= 1");
  ds.validate();
  const int n = ds.size();

  Rng rng(config.seed);
  const std::vector<BootstrapSplit> splits = select_coverage_maximizing_bootstraps(
      n, config.n_boot, config.bootstrap_pool_factor, rng);

  // One result slot per bootstrap; assembly below walks slots in index order,
  // so the table is identical no matter how the iterations were scheduled.
  struct Slot {
    std::vector<int> indices;
    std::vector<double> p_values;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(config.n_boot));

  parallel_for(config.n_boot, jobs, [&](int t) {
    const BootstrapSplit& split = splits[static_cast<std::size_t>(t)];
    const LabeledDataset bag = ds.subset(split.in_bag);
    const auto model =
        train_cp_model(bag, config, derive_seed(config.seed, static_cast<std::uint64_t>(t)));
    const ClasswiseCalibration calibration(*model, ds, split.oob);

    Slot& slot = slots[static_cast<std::size_t>(t)];
    int prev = -1;
    for (int i : split.in_bag) {
      if (i == prev) continue;  // each unique in-bag sample gets one value
      prev = i;
      const TimePrior proba = model->predict_proba(ds.row(i).transpose());
      slot.indices.push_back(i);
      slot.p_values.push_back(calibration.min_class_p_value(proba));
    }
  });

  PValueTable table;
  table.per_sample.resize(static_cast<std::size_t>(n));
  for (const Slot& slot : slots) {
    for (std::size_t k = 0; k < slot.indices.size(); ++k)
      table.per_sample[static_cast<std::size_t>(slot.indices[k])].push_back(
          slot.p_values[k]);
  }
  aggregate_p_value_table(table);
  return table;
}

PValueTable split_conformal_localization(const LabeledDataset& ds, double split_fraction,
                                         CpModelKind model_kind, const TreeParams& tree,
                                         const MlpParams& mlp, std::uint64_t seed) {
  ds.validate();
  const int n = ds.size();
  if (!(split_fraction > 0.0 && split_fraction < 1.0))
    throw std::invalid_argument("split_conformal_localization: fraction in (0,1)");
  int n_train = static_cast<int>(std::floor(split_fraction * n));
  n_train = std::max(1, std::min(n - 1, n_train));

  Rng rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<int> train(order.begin(), order.begin() + n_train);
  std::vector<int> calib(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(calib.begin(), calib.end());

  CPConfig config;
  config.model_kind = model_kind;
  config.tree = tree;
  config.mlp = mlp;
  const LabeledDataset train_ds = ds.subset(train);
  const auto model = train_cp_model(train_ds, config, derive_seed(seed, 1));
  const ClasswiseCalibration calibration(*model, ds, calib);

  PValueTable table;
  table.per_sample.resize(static_cast<std::size_t>(n));
  for (int i : train) {
    const TimePrior proba = model->predict_proba(ds.row(i).transpose());
    table.per_sample[static_cast<std::size_t>(i)].push_back(
        calibration.min_class_p_value(proba));
  }
  aggregate_p_value_table(table);
  return table;
}

}  // namespace driftloc
