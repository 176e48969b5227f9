#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "driftloc/baselines.hpp"
#include "driftloc/conformal.hpp"
#include "driftloc/data.hpp"
#include "driftloc/random.hpp"

using namespace driftloc;

namespace {

LabeledDataset windows_1d(const std::vector<double>& before,
                          const std::vector<double>& after) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(before.size()), 1);
  Eigen::MatrixXd a(static_cast<Eigen::Index>(after.size()), 1);
  for (std::size_t i = 0; i < before.size(); ++i) b(static_cast<Eigen::Index>(i), 0) = before[i];
  for (std::size_t i = 0; i < after.size(); ++i) a(static_cast<Eigen::Index>(i), 0) = after[i];
  return make_window_pair(b, a);
}

}  // namespace

TEST_CASE("kdq: identical windows score zero everywhere") {
  Rng rng(3);
  std::vector<double> points(20);
  for (double& p : points) p = rng.normal() * 4.0;
  const LabeledDataset ds = windows_1d(points, points);
  const LocalTestResult result = kdq_tree_localize(ds, {2, 12});
  CHECK(result.orientation == ScoreOrientation::higher_is_drifting);
  for (double v : result.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("kdq: pure-window leaf scores the hand-computed KL") {
  std::vector<double> before(10), after(10);
  for (int i = 0; i < 10; ++i) {
    before[static_cast<std::size_t>(i)] = 0.1 * i;
    after[static_cast<std::size_t>(i)] = 100.0 + 0.1 * i;
  }
  const LabeledDataset ds = windows_1d(before, after);
  const LocalTestResult result = kdq_tree_localize(ds, {10, 20});
  // leaf of 10 before-window points: smoothed (11/12, 1/12) against (1/2, 1/2)
  const double expected = (11.0 / 12.0) * std::log((11.0 / 12.0) / 0.5) +
                          (1.0 / 12.0) * std::log((1.0 / 12.0) / 0.5);
  for (int i = 0; i < 10; ++i)
    CHECK(result.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(expected).epsilon(1e-12));
  // the mirrored after-window leaf carries the same divergence
  for (int i = 10; i < 20; ++i)
    CHECK(result.values[static_cast<std::size_t>(i)] ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kdq: depth zero puts everyone in one leaf") {
  Rng rng(8);
  std::vector<double> before(7), after(9);
  for (double& p : before) p = rng.normal();
  for (double& p : after) p = rng.normal() + 1.0;
  const LabeledDataset ds = windows_1d(before, after);
  const LocalTestResult result = kdq_tree_localize(ds, {10, 0});
  for (double v : result.values) CHECK(v == result.values[0]);
}

TEST_CASE("ldd: a balanced neighborhood has zero drift degree") {
  // point 0 (before, at 0): nearest two are 0.5 (after) and 1 (before)
  const LabeledDataset ds = windows_1d({0.0, 1.0}, {0.5, 100.0});
  const LocalTestResult result = ldd_dis_localize(ds, {2, 0}, 1);
  CHECK(result.orientation == ScoreOrientation::higher_is_drifting);
  CHECK(result.values[0] == 0.0);
}

TEST_CASE("ldd: swapping equal windows keeps the balanced point at zero") {
  const LabeledDataset swapped = windows_1d({0.5, 100.0}, {0.0, 1.0});
  const LocalTestResult result = ldd_dis_localize(swapped, {2, 0}, 1);
  CHECK(result.values[2] == 0.0);  // the old point 0 now sits at index 2
}

TEST_CASE("ldd: all-after neighborhood yields delta = 10 with smoothing") {
  std::vector<double> before, after;
  before.push_back(0.0);  // the probe point
  for (int i = 0; i < 29; ++i) before.push_back(100.0 + 0.01 * i);
  for (int i = 0; i < 30; ++i) after.push_back(0.5 + 0.01 * i);
  const LabeledDataset ds = windows_1d(before, after);
  const LocalTestResult result = ldd_dis_localize(ds, {10, 0}, 1);
  // k1 = 0, k2 = 10, equal windows: (11/1) - 1
  CHECK(result.values[0] == 10.0);
}

TEST_CASE("ldd: permutation normalization lands in [0,1] and flags the probe") {
  std::vector<double> before, after;
  before.push_back(0.0);
  for (int i = 0; i < 29; ++i) before.push_back(100.0 + 0.01 * i);
  for (int i = 0; i < 30; ++i) after.push_back(0.5 + 0.01 * i);
  const LabeledDataset ds = windows_1d(before, after);
  const LocalTestResult result = ldd_dis_localize(ds, {10, 60}, 5);
  for (double v : result.values) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  // the probe's neighborhood is as extreme as it gets; its score should be high
  CHECK(result.values[0] >= 0.9);
}

TEST_CASE("ldd: parameter validation") {
  const LabeledDataset ds = windows_1d({0.0, 1.0}, {2.0, 3.0});
  CHECK_THROWS_AS(ldd_dis_localize(ds, {4, 0}, 1), std::invalid_argument);
  // k auto-resolves to min(20, n/5) = 0 here, which is rejected too
  CHECK_THROWS_AS(ldd_dis_localize(ds, {0, 0}, 1), std::invalid_argument);
}

TEST_CASE("ldd: determinism given the seed") {
  auto [ds, truth] = generate_no_drift_stream(40, 3, 17);
  (void)truth;
  const LocalTestResult a = ldd_dis_localize(ds, {5, 30}, 9);
  const LocalTestResult b = ldd_dis_localize(ds, {5, 30}, 9);
  CHECK(a.values == b.values);
}

TEST_CASE("mbdl: constant features make every permutation equivalent, p = 1") {
  // no split possible: single leaf, entropy invariant under label shuffles
  std::vector<double> before(12, 1.0), after(12, 1.0);
  const LabeledDataset ds = windows_1d(before, after);
  const LocalTestResult result = mbdl_permutation_localize(ds, {6, 20, {5, 5}}, 4);
  CHECK(result.orientation == ScoreOrientation::lower_is_drifting);
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    if (!result.assigned[i]) continue;
    CHECK(result.values[i] == 1.0);
  }
}

TEST_CASE("mbdl: fully separated windows get the minimal p-value") {
  std::vector<double> before(30), after(30);
  for (int i = 0; i < 30; ++i) {
    before[static_cast<std::size_t>(i)] = 0.01 * i;
    after[static_cast<std::size_t>(i)] = 10.0 + 0.01 * i;
  }
  const LabeledDataset ds = windows_1d(before, after);
  const int n_perm = 19;
  const LocalTestResult result =
      mbdl_permutation_localize(ds, {8, n_perm, {3, 5}}, 12);
  int minimal = 0, assigned = 0;
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    if (!result.assigned[i]) continue;
    ++assigned;
    if (result.values[i] == 1.0 / (1.0 + n_perm)) ++minimal;
  }
  CHECK(assigned >= 50);
  // every window is in its own pure leaf; barring freak permutations the
  // observed zero entropy is never matched
  CHECK(minimal == assigned);
}

TEST_CASE("mbdl: n_perm = 1 collapses p-values onto {1/2, 1}") {
  auto [ds, truth] = generate_no_drift_stream(30, 2, 3);
  (void)truth;
  const LocalTestResult result = mbdl_permutation_localize(ds, {5, 1, {3, 3}}, 8);
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    if (!result.assigned[i]) continue;
    CHECK((result.values[i] == 0.5 || result.values[i] == 1.0));
  }
}

TEST_CASE("mbdl: unassigned samples are exactly those never in-bag") {
  const int n = 26;
  auto [ds, truth] = generate_no_drift_stream(n, 2, 21);
  (void)truth;
  const std::uint64_t seed = 14;
  const LocalTestResult result = mbdl_permutation_localize(ds, {2, 5, {3, 3}}, seed);
  Rng rng(seed);
  std::set<int> in_bag;
  for (int b = 0; b < 2; ++b) {
    for (int i : sample_bootstrap(n, rng).in_bag) in_bag.insert(i);
  }
  for (int i = 0; i < n; ++i)
    CHECK(result.assigned[static_cast<std::size_t>(i)] == (in_bag.count(i) > 0));
}

TEST_CASE("mbdl: p-values on exchangeable data are super-uniform") {
  Rng seeds(1001);
  int evaluations = 0;
  int below05 = 0, below10 = 0, below20 = 0;
  for (int rep = 0; rep < 6; ++rep) {
    auto [ds, truth] = generate_no_drift_stream(60, 2, seeds.next_u64());
    (void)truth;
    const LocalTestResult result =
        mbdl_permutation_localize(ds, {9, 39, {4, 5}}, seeds.next_u64());
    for (std::size_t i = 0; i < result.values.size(); ++i) {
      if (!result.assigned[i]) continue;
      ++evaluations;
      below05 += result.values[i] <= 0.05 ? 1 : 0;
      below10 += result.values[i] <= 0.10 ? 1 : 0;
      below20 += result.values[i] <= 0.20 ? 1 : 0;
    }
  }
  CHECK(evaluations >= 300);
  CHECK(static_cast<double>(below05) / evaluations <= 0.05 + 0.05);
  CHECK(static_cast<double>(below10) / evaluations <= 0.10 + 0.05);
  CHECK(static_cast<double>(below20) / evaluations <= 0.20 + 0.06);
}

TEST_CASE("rf heuristic: score equals the TV distance of the OOB prediction") {
  auto [ds, truth] = generate_no_drift_stream(40, 2, 5);
  (void)truth;
  RfHeurParams params;
  params.n_trees = 15;
  params.tree = {3, 2};
  const std::uint64_t seed = 33;
  const LocalTestResult result = rf_heuristic_localize(ds, params, seed);

  ForestParams forest_params;
  forest_params.n_trees = params.n_trees;
  forest_params.tree = params.tree;
  const RandomForest forest = train_random_forest(ds, forest_params, seed);
  const Eigen::VectorXd prior = time_label_prior(ds).probs;
  Eigen::VectorXd oob;
  for (int i = 0; i < ds.size(); ++i) {
    if (forest.oob_prediction(i, oob)) {
      CHECK(result.values[static_cast<std::size_t>(i)] ==
            0.5 * (oob - prior).cwiseAbs().sum());
    } else {
      CHECK(result.values[static_cast<std::size_t>(i)] == 0.0);
    }
  }
}

TEST_CASE("rf heuristic: tv arithmetic on a fully confident prediction") {
  // TV((1,0), (0.5,0.5)) = 0.5, the extreme a prediction can reach
  Eigen::VectorXd confident(2), prior(2);
  confident << 1.0, 0.0;
  prior << 0.5, 0.5;
  CHECK(0.5 * (confident - prior).cwiseAbs().sum() == 0.5);
}

TEST_CASE("rf heuristic: a sample in the single tree's bag scores zero") {
  const LabeledDataset ds = windows_1d({0.0}, {1.0});
  RfHeurParams params;
  params.n_trees = 1;
  params.tree = {1, 1};
  bool found = false;
  for (std::uint64_t seed = 0; seed < 64 && !found; ++seed) {
    ForestParams fp;
    fp.n_trees = 1;
    fp.tree = params.tree;
    const RandomForest forest = train_random_forest(ds, fp, seed);
    const auto& bag = forest.tree_in_bag(0);
    if (bag[0] != bag[1]) continue;  // need one sample drawn twice
    const int inside = bag[0];
    const LocalTestResult result = rf_heuristic_localize(ds, params, seed);
    CHECK(result.values[static_cast<std::size_t>(inside)] == 0.0);
    found = true;
  }
  CHECK(found);
}

TEST_CASE("rf heuristic: no-drift scores concentrate near zero") {
  auto [ds, truth] = generate_no_drift_stream(1000, 4, 2026);
  (void)truth;
  RfHeurParams params;
  params.n_trees = 40;
  params.tree = {5, 5};
  const LocalTestResult result = rf_heuristic_localize(ds, params, 7);
  double mean = 0.0;
  for (double v : result.values) mean += v;
  mean /= static_cast<double>(result.values.size());
  CHECK(mean < 0.15);
}

TEST_CASE("all baselines emit one finite value per sample, deterministically") {
  auto [ds, truth] = generate_class_swap_stream(
      {3, 20, 4, 3, 1.0, -10.0, 10.0, 44});
  (void)truth;
  const LocalTestResult kdq = kdq_tree_localize(ds, {5, 12});
  const LocalTestResult ldd = ldd_dis_localize(ds, {5, 20}, 2);
  const LocalTestResult mbdl = mbdl_permutation_localize(ds, {6, 9, {4, 3}}, 2);
  const LocalTestResult rf = rf_heuristic_localize(ds, {10, {4, 3}}, 2);
  for (const auto* r : {&kdq, &ldd, &rf}) {
    CHECK(r->values.size() == static_cast<std::size_t>(ds.size()));
    for (double v : r->values) CHECK(std::isfinite(v));
  }
  for (std::size_t i = 0; i < mbdl.values.size(); ++i)
    if (mbdl.assigned[i]) CHECK(std::isfinite(mbdl.values[i]));

  const LocalTestResult mbdl2 = mbdl_permutation_localize(ds, {6, 9, {4, 3}}, 2);
  CHECK(mbdl.assigned == mbdl2.assigned);
  for (std::size_t i = 0; i < mbdl.values.size(); ++i)
    if (mbdl.assigned[i]) CHECK(mbdl.values[i] == mbdl2.values[i]);
}
