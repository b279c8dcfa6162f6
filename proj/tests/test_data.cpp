#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iabma/data.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

using namespace iabma;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("simulation labels recompute exactly from features and tags") {
  SimulationConfig cfg;
  cfg.n_train = 400;
  cfg.n_test = 200;
  cfg.seed = 5;
  const auto [train, test] = simulate_two_region(cfg);
  for (const Dataset* data : {&train, &test}) {
    REQUIRE(data->region_tags.size() == static_cast<std::size_t>(data->rows()));
    for (int i = 0; i < data->rows(); ++i) {
      const double x1 = data->features(i, 0);
      const double x2 = data->features(i, 1);
      if (data->region_tags[static_cast<std::size_t>(i)] == 0) {
        const int expected = x1 + x2 > -cfg.offset ? 1 : 0;
        CHECK(data->class_label(i) == expected);
      } else {
        const double r = std::hypot(x1 - cfg.offset, x2);
        CHECK(data->class_label(i) == (r < 1.0 ? 1 : 0));
      }
    }
  }
}

TEST_CASE("simulation split sizes and region halves") {
  SimulationConfig cfg;
  cfg.n_train = 1001;  // odd: linear gets floor(n/2)
  cfg.n_test = 500;
  cfg.seed = 9;
  const auto [train, test] = simulate_two_region(cfg);
  CHECK(train.rows() == 1001);
  CHECK(test.rows() == 500);
  int linear = 0;
  for (const int tag : train.region_tags) linear += tag == 0 ? 1 : 0;
  CHECK(linear == 500);
  CHECK(train.num_classes == 2);
}

TEST_CASE("circular region label proportion approximates P(U < 1) = 1/2") {
  SimulationConfig cfg;
  cfg.n_train = 20000;
  cfg.n_test = 2;
  cfg.seed = 31;
  const auto [train, test] = simulate_two_region(cfg);
  int circular = 0, positive = 0;
  for (int i = 0; i < train.rows(); ++i) {
    if (train.region_tags[static_cast<std::size_t>(i)] == 1) {
      ++circular;
      positive += train.class_label(i);
    }
  }
  const double p = static_cast<double>(positive) / circular;
  // 3-sigma binomial tolerance around 0.5.
  const double sigma = std::sqrt(0.25 / circular);
  CHECK(std::abs(p - 0.5) <= 3.0 * sigma);
}

TEST_CASE("simulation replays under the same seed") {
  SimulationConfig cfg;
  cfg.seed = 77;
  const auto [a_train, a_test] = simulate_two_region(cfg);
  const auto [b_train, b_test] = simulate_two_region(cfg);
  CHECK(a_train.features == b_train.features);
  CHECK(a_test.features == b_test.features);
  CHECK(a_train.labels == b_train.labels);
}

TEST_CASE("simulation config validation") {
  SimulationConfig cfg;
  cfg.n_train = 1;
  CHECK_THROWS_AS(simulate_two_region(cfg), std::invalid_argument);
  cfg.n_train = 10;
  cfg.offset = 0.0;
  CHECK_THROWS_AS(simulate_two_region(cfg), std::invalid_argument);
}

TEST_CASE("csv round-trip is bit-exact") {
  SimulationConfig cfg;
  cfg.n_train = 50;
  cfg.n_test = 10;
  cfg.seed = 3;
  const auto [train, test] = simulate_two_region(cfg);
  const auto path = temp_path("iabma_roundtrip.csv");
  write_csv(path, train, {"x1", "x2"});

  CsvSchema schema;
  schema.label_col = "label";
  schema.task = Task::classification;
  schema.feature_cols = {"x1", "x2"};
  const Dataset loaded = load_csv(path, schema);
  REQUIRE(loaded.rows() == train.rows());
  CHECK(loaded.features == train.features);  // %.17g survives the round trip
  CHECK(loaded.labels == train.labels);
  std::filesystem::remove(path);
}

TEST_CASE("csv loader basics and error paths") {
  const auto path = temp_path("iabma_small.csv");
  {
    std::ofstream out(path);
    out << "a,b,y\n1,2,0.5\n3,4,1.5\n-1,0.25,2.5\n";
  }
  CsvSchema schema;
  schema.label_col = "y";
  schema.task = Task::regression;
  const Dataset data = load_csv(path, schema);
  CHECK(data.rows() == 3);
  CHECK(data.dims() == 2);
  CHECK(data.labels[2] == 2.5);

  schema.label_col = "missing";
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(path, schema)),
                       doctest::Contains("missing"), std::runtime_error);

  {
    std::ofstream out(path);
    out << "a,b,y\n1,2,0.5\n3,oops,1.5\n";
  }
  schema.label_col = "y";
  CHECK_THROWS_WITH_AS(static_cast<void>(load_csv(path, schema)),
                       doctest::Contains("row 2"), std::runtime_error);

  {
    std::ofstream out(path);
    out << "";
  }
  CHECK_THROWS_AS(static_cast<void>(load_csv(path, schema)), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("csv classification labels map in first-appearance order") {
  const auto path = temp_path("iabma_labels.csv");
  {
    std::ofstream out(path);
    out << "x,y\n0.1,5\n0.2,3\n0.3,5\n0.4,8\n";
  }
  CsvSchema schema;
  schema.label_col = "y";
  schema.task = Task::classification;
  const Dataset data = load_csv(path, schema);
  CHECK(data.class_label(0) == 0);  // 5 -> 0
  CHECK(data.class_label(1) == 1);  // 3 -> 1
  CHECK(data.class_label(2) == 0);
  CHECK(data.class_label(3) == 2);  // 8 -> 2
  CHECK(data.num_classes == 3);
  std::filesystem::remove(path);
}

TEST_CASE("stratified split keeps proportions and is deterministic") {
  Eigen::MatrixXd x(1000, 1);
  std::vector<int> labels(1000);
  for (int i = 0; i < 1000; ++i) {
    x(i, 0) = i;
    labels[static_cast<std::size_t>(i)] = i < 500 ? 0 : 1;
  }
  const Dataset data = Dataset::make_classification(x, labels);

  SplitOptions options;
  options.test_fraction = 0.2;
  options.seed = 11;
  const SplitResult a = split(data, options);
  CHECK(a.test.rows() == 200);
  CHECK(a.train.rows() == 800);
  int test_ones = 0;
  for (int i = 0; i < a.test.rows(); ++i) test_ones += a.test.class_label(i);
  CHECK(test_ones == 100);  // exact for balanced strata

  const SplitResult b = split(data, options);
  CHECK(a.test.features == b.test.features);
  CHECK(a.train.features == b.train.features);
}

TEST_CASE("split produces disjoint covering index sets") {
  Eigen::MatrixXd x(97, 1);
  Eigen::VectorXd y(97);
  Rng rng(4);
  for (int i = 0; i < 97; ++i) {
    x(i, 0) = i;  // unique key per row
    y[i] = rng.gaussian();
  }
  const Dataset data = Dataset::make_regression(x, y);
  SplitOptions options;
  options.test_fraction = 0.25;
  options.bins = 12;
  options.seed = 2;
  const SplitResult result = split(data, options);
  std::set<double> seen;
  for (int i = 0; i < result.train.rows(); ++i) seen.insert(result.train.features(i, 0));
  for (int i = 0; i < result.test.rows(); ++i) {
    CHECK(seen.count(result.test.features(i, 0)) == 0);
    seen.insert(result.test.features(i, 0));
  }
  CHECK(static_cast<int>(seen.size()) == 97);
}

TEST_CASE("regression stratification merges degenerate bins") {
  // 13 rows into 12 quantile bins leaves singleton bins that must merge.
  Eigen::MatrixXd x(13, 1);
  Eigen::VectorXd y(13);
  for (int i = 0; i < 13; ++i) {
    x(i, 0) = i;
    y[i] = i;
  }
  const Dataset data = Dataset::make_regression(x, y);
  SplitOptions options;
  options.test_fraction = 0.3;
  options.seed = 8;
  const SplitResult result = split(data, options);
  CHECK(result.train.rows() + result.test.rows() == 13);
  CHECK(!result.notes.empty());
}

TEST_CASE("classification fallback when a stratum is degenerate") {
  Eigen::MatrixXd x(10, 1);
  std::vector<int> labels(10, 0);
  labels[9] = 1;  // singleton class
  for (int i = 0; i < 10; ++i) x(i, 0) = i;
  const Dataset data = Dataset::make_classification(x, labels);
  SplitOptions options;
  options.test_fraction = 0.2;
  options.seed = 1;
  const SplitResult result = split(data, options);
  CHECK(result.train.rows() + result.test.rows() == 10);
  CHECK(!result.notes.empty());
}

TEST_CASE("balanced training split downsamples the majority class") {
  Eigen::MatrixXd x(100, 1);
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) {
    x(i, 0) = i;
    labels[static_cast<std::size_t>(i)] = i < 80 ? 0 : 1;
  }
  const Dataset data = Dataset::make_classification(x, labels);
  SplitOptions options;
  options.test_fraction = 0.2;
  options.balance_train = true;
  options.seed = 3;
  const SplitResult result = split(data, options);
  int zeros = 0, ones = 0;
  for (int i = 0; i < result.train.rows(); ++i) {
    (result.train.class_label(i) == 0 ? zeros : ones)++;
  }
  CHECK(zeros == ones);
}

TEST_CASE("split rejects bad fractions") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  const Dataset data = Dataset::make_regression(x, Eigen::VectorXd::Ones(4));
  SplitOptions options;
  options.test_fraction = 1.0;
  CHECK_THROWS_AS(split(data, options), std::invalid_argument);
}
