#include "driftloc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "driftloc/errors.hpp"
#include "driftloc/parallel.hpp"
#include "driftloc/random.hpp"

namespace driftloc {

double roc_auc(std::span<const double> drift_scores, const std::vector<bool>& truth) {
  if (drift_scores.size() != truth.size())
    throw std::invalid_argument("roc_auc: scores and truth length mismatch");
  const int n = static_cast<int>(drift_scores.size());
  int n_pos = 0;
  for (bool b : truth) n_pos += b ? 1 : 0;
  const int n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: need at least one drifting and one non-drifting sample");
  for (double s : drift_scores)
    if (!std::isfinite(s)) throw NumericError("roc_auc: non-finite score");

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return drift_scores[static_cast<std::size_t>(a)] < drift_scores[static_cast<std::size_t>(b)];
  });

  // Average ranks over tie runs; U = R_pos - n_pos (n_pos + 1) / 2.
  double rank_sum_pos = 0.0;
  int i = 0;
  while (i < n) {
    int j = i;
    while (j + 1 < n &&
           drift_scores[static_cast<std::size_t>(order[static_cast<std::size_t>(j + 1)])] ==
               drift_scores[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])])
      ++j;
    const double avg_rank = 0.5 * ((i + 1) + (j + 1));
    for (int r = i; r <= j; ++r) {
      if (truth[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])])
        rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double u = rank_sum_pos - 0.5 * n_pos * (n_pos + 1.0);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double roc_auc(const LocalTestResult& result, const DriftGroundTruth& truth) {
  if (result.values.size() != truth.size())
    throw std::invalid_argument("roc_auc: result and truth length mismatch");
  std::vector<double> scores;
  std::vector<bool> labels;
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    if (!result.assigned.empty() && !result.assigned[i]) continue;
    scores.push_back(result.drift_score(static_cast<int>(i)));
    labels.push_back(truth.is_drifting[i]);
  }
  return roc_auc(scores, labels);
}

std::pair<LabeledDataset, DriftGroundTruth> materialize_data(const DataSpec& spec,
                                                             std::uint64_t seed) {
  switch (spec.kind) {
    case DataSpec::Kind::class_swap: {
      ClassSwapSpec s = spec.class_swap;
      s.seed = seed;
      return generate_class_swap_stream(s);
    }
    case DataSpec::Kind::no_drift:
      return generate_no_drift_stream(spec.no_drift_n, spec.no_drift_d, seed);
    case DataSpec::Kind::csv: {
      auto [ds, truth] = load_embedding_csv(spec.csv_path);
      if (!truth)
        throw ConfigError("'" + spec.csv_path +
                          "' has no drift column; benchmark evaluation needs ground truth");
      return {std::move(ds), std::move(*truth)};
    }
  }
  throw std::logic_error("materialize_data: unreachable");
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = q * (static_cast<double>(values.size()) - 1.0);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

void summarize(ResultTable& table) {
  std::vector<double> aucs;
  aucs.reserve(table.reps.size());
  for (const auto& rep : table.reps) aucs.push_back(rep.auc);
  table.mean = std::accumulate(aucs.begin(), aucs.end(), 0.0) /
               static_cast<double>(aucs.size());
  table.median = quantile(aucs, 0.5);
  table.q25 = quantile(aucs, 0.25);
  table.q75 = quantile(aucs, 0.75);
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& config, int jobs) {
  if (config.n_repetitions < 1)
    throw std::invalid_argument("run_experiment: n_repetitions must be >= 1");

  // CSV data is fixed across repetitions; only the method seed varies.
  const bool fixed_data = config.data.kind == DataSpec::Kind::csv;
  std::pair<LabeledDataset, DriftGroundTruth> shared;
  if (fixed_data) shared = materialize_data(config.data, 0);

  ResultTable table;
  table.reps.resize(static_cast<std::size_t>(config.n_repetitions));
  parallel_for(config.n_repetitions, jobs, [&](int r) {
    const std::uint64_t data_seed = derive_seed(config.seed, 2 * static_cast<std::uint64_t>(r));
    const std::uint64_t method_seed =
        derive_seed(config.seed, 2 * static_cast<std::uint64_t>(r) + 1);
    std::pair<LabeledDataset, DriftGroundTruth> local;
    if (!fixed_data) local = materialize_data(config.data, data_seed);
    const auto& [ds, truth] = fixed_data ? shared : local;
    const LocalTestResult result = run_method(config.method, ds, method_seed, 1);
    RepetitionResult& rep = table.reps[static_cast<std::size_t>(r)];
    rep.auc = roc_auc(result, truth);
    rep.n_evaluated = 0;
    for (std::size_t i = 0; i < result.values.size(); ++i)
      rep.n_evaluated += (result.assigned.empty() || result.assigned[i]) ? 1 : 0;
    rep.n_excluded = ds.size() - rep.n_evaluated;
  });
  summarize(table);
  return table;
}

std::vector<SweepPoint> bootstrap_sweep(const ExperimentConfig& config,
                                        const std::vector<int>& n_boot_grid, int jobs) {
  if (n_boot_grid.empty()) throw std::invalid_argument("bootstrap_sweep: empty grid");
  std::vector<SweepPoint> curve;
  curve.reserve(n_boot_grid.size());
  for (int n_boot : n_boot_grid) {
    ExperimentConfig point = config;
    point.method.n_boot = n_boot;
    const ResultTable table = run_experiment(point, jobs);
    curve.push_back({static_cast<double>(n_boot), table.median, table.q25, table.q75});
  }
  return curve;
}

std::vector<SweepPoint> split_size_sweep(const ExperimentConfig& config,
                                         const std::vector<double>& fraction_grid,
                                         int jobs) {
  if (fraction_grid.empty()) throw std::invalid_argument("split_size_sweep: empty grid");
  std::vector<SweepPoint> curve;
  curve.reserve(fraction_grid.size());
  for (double fraction : fraction_grid) {
    ExperimentConfig point = config;
    point.method.id = "split-cp";
    point.method.split_fraction = fraction;
    const ResultTable table = run_experiment(point, jobs);
    curve.push_back({fraction, table.median, table.q25, table.q75});
  }
  return curve;
}

}  // namespace driftloc
