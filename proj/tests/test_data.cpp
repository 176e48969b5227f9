#include <doctest.h>

#include <cmath>
#include <fstream>

#include "driftloc/data.hpp"
#include "driftloc/errors.hpp"
#include "test_util.hpp"

using namespace driftloc;

TEST_CASE("class swap stream has the paper's shapes") {
  ClassSwapSpec spec;
  spec.samples_per_window = 60;
  spec.n_drifting_per_window = 5;
  spec.dimension = 4;
  spec.seed = 1;
  auto [ds, truth] = generate_class_swap_stream(spec);
  CHECK(ds.size() == 120);
  CHECK(truth.n_drifting() == 10);
  int count0 = 0;
  for (int y : ds.time_labels()) count0 += y == 0 ? 1 : 0;
  CHECK(count0 == 60);

  spec.samples_per_window = 250;
  spec.n_drifting_per_window = 49;
  auto [big, big_truth] = generate_class_swap_stream(spec);
  CHECK(big.size() == 500);
  CHECK(big_truth.n_drifting() == 98);
}

TEST_CASE("class swap with zero drifting is a pure no-drift stream") {
  ClassSwapSpec spec;
  spec.samples_per_window = 15;
  spec.n_drifting_per_window = 0;
  spec.seed = 9;
  auto [ds, truth] = generate_class_swap_stream(spec);
  CHECK(ds.size() == 30);
  CHECK(truth.n_drifting() == 0);
}

TEST_CASE("class swap validates its spec") {
  ClassSwapSpec spec;
  spec.n_classes = 2;
  CHECK_THROWS_AS(generate_class_swap_stream(spec), std::invalid_argument);
  spec.n_classes = 3;
  spec.n_drifting_per_window = spec.samples_per_window + 1;
  CHECK_THROWS_AS(generate_class_swap_stream(spec), std::invalid_argument);
}

TEST_CASE("generators are seed-deterministic, distinct seeds differ") {
  ClassSwapSpec spec;
  spec.seed = 5;
  auto [a, ta] = generate_class_swap_stream(spec);
  auto [b, tb] = generate_class_swap_stream(spec);
  CHECK(a.features() == b.features());
  CHECK(ta.is_drifting == tb.is_drifting);
  spec.seed = 6;
  auto [c, tc] = generate_class_swap_stream(spec);
  (void)tc;
  CHECK(a.features() != c.features());
}

TEST_CASE("no-drift stream basics") {
  auto [ds, truth] = generate_no_drift_stream(4, 1, 3);
  CHECK(ds.size() == 4);
  CHECK(ds.time_labels() == std::vector<int>{0, 0, 1, 1});
  CHECK(truth.n_drifting() == 0);
  CHECK_THROWS_AS(generate_no_drift_stream(5, 1, 3), std::invalid_argument);

  auto [again, t2] = generate_no_drift_stream(4, 1, 3);
  (void)t2;
  CHECK(ds.features() == again.features());
}

TEST_CASE("no-drift window means agree up to sampling noise") {
  auto [ds, truth] = generate_no_drift_stream(2000, 1, 11);
  (void)truth;
  const double mean0 = ds.features().topRows(1000).mean();
  const double mean1 = ds.features().bottomRows(1000).mean();
  CHECK(std::abs(mean0 - mean1) < 0.2);
}

TEST_CASE("csv loading: happy path with any column order") {
  testutil::TempDir dir;
  const std::string path = dir.file("tiny.csv");
  testutil::spit(path, "f1,t,f0\n1.5,0,-2.0\n2.5,0,0.25\n3.5,1,7\n");
  auto [ds, truth] = load_embedding_csv(path);
  CHECK_FALSE(truth.has_value());
  CHECK(ds.size() == 3);
  CHECK(ds.dimension() == 2);
  CHECK(ds.features()(0, 0) == -2.0);
  CHECK(ds.features()(0, 1) == 1.5);
  CHECK(ds.label(2) == 1);
}

TEST_CASE("csv loading: drift column becomes ground truth") {
  testutil::TempDir dir;
  const std::string path = dir.file("drift.csv");
  testutil::spit(path, "t,drift,f0\n0,0,1\n0,1,2\n1,0,3\n1,1,4\n");
  auto [ds, truth] = load_embedding_csv(path);
  REQUIRE(truth.has_value());
  CHECK(truth->is_drifting == std::vector<bool>{false, true, false, true});
  CHECK(ds.size() == 4);
}

TEST_CASE("csv loading: errors name the offending row") {
  testutil::TempDir dir;
  const std::string bad_value = dir.file("bad.csv");
  testutil::spit(bad_value, "t,f0\n0,1.0\n1,oops\n");
  CHECK_THROWS_WITH_AS(load_embedding_csv(bad_value),
                       doctest::Contains("row 3"), SchemaError);

  const std::string bad_count = dir.file("count.csv");
  testutil::spit(bad_count, "t,f0\n0,1.0,9\n1,2.0\n");
  CHECK_THROWS_WITH_AS(load_embedding_csv(bad_count),
                       doctest::Contains("row 2"), SchemaError);

  const std::string bad_column = dir.file("col.csv");
  testutil::spit(bad_column, "t,x0\n0,1.0\n");
  CHECK_THROWS_AS(load_embedding_csv(bad_column), SchemaError);

  const std::string bad_label = dir.file("label.csv");
  testutil::spit(bad_label, "t,f0\n-1,1.0\n0,2.0\n");
  CHECK_THROWS_AS(load_embedding_csv(bad_label), SchemaError);

  const std::string one_class = dir.file("oneclass.csv");
  testutil::spit(one_class, "t,f0\n1,1.0\n1,2.0\n");
  CHECK_THROWS_AS(load_embedding_csv(one_class), SchemaError);

  CHECK_THROWS_AS(load_embedding_csv(dir.file("missing.csv")), SchemaError);
}

TEST_CASE("csv loading: CRLF line endings are accepted") {
  testutil::TempDir dir;
  const std::string path = dir.file("crlf.csv");
  testutil::spit(path, "t,f0\r\n0,1.25\r\n1,-3.5\r\n");
  auto [ds, truth] = load_embedding_csv(path);
  (void)truth;
  CHECK(ds.size() == 2);
  CHECK(ds.features()(0, 0) == 1.25);
  CHECK(ds.features()(1, 0) == -3.5);
}

TEST_CASE("csv round-trip is exact") {
  testutil::TempDir dir;
  ClassSwapSpec spec;
  spec.samples_per_window = 12;
  spec.n_drifting_per_window = 3;
  spec.dimension = 3;
  spec.seed = 77;
  auto [ds, truth] = generate_class_swap_stream(spec);
  const std::string path = dir.file("roundtrip.csv");
  save_embedding_csv(path, ds, &truth);
  auto [loaded, loaded_truth] = load_embedding_csv(path);
  REQUIRE(loaded_truth.has_value());
  CHECK(loaded.features() == ds.features());
  CHECK(loaded.time_labels() == ds.time_labels());
  CHECK(loaded_truth->is_drifting == truth.is_drifting);
}
