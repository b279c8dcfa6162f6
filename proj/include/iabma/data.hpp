#pragma once

#include "iabma/core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace iabma {

// Two-region binary simulation: a Gaussian cloud at (-t, 0) labelled by the
// linear rule 1{x1 + x2 > -t}, and a ring around (t, 0) sampled as
// theta ~ U(0, 2pi), r = sqrt(U), U ~ U(0, 2), labelled by 1{r < 1}.
struct SimulationConfig {
  int n_train = 1000;
  int n_test = 500;
  double offset = 1.0;     // t
  double cov_scale = 0.1;  // Gaussian covariance is cov_scale * I
  std::uint64_t seed = 0;

  void validate() const;
};

// Region tag 0 = linear subpopulation, 1 = circular. Train and test come
// from independent seeded streams derived from cfg.seed.
std::pair<Dataset, Dataset> simulate_two_region(const SimulationConfig& cfg);

struct CsvSchema {
  std::string label_col;
  Task task = Task::regression;
  // Empty means every non-label column, in header order.
  std::vector<std::string> feature_cols;
};

// Comma-separated, header row, UTF-8, locale-independent decimal point.
// Rows with unparseable cells are rejected with their 1-based data row
// number. Classification labels are mapped to dense indices in
// first-appearance order.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);

// Writes a dataset with headers f0..f{d-1} (or given names), `label`, and a
// `region` column when tags are present. Doubles print round-trip exact.
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::vector<std::string>& feature_names = {});

struct SplitOptions {
  double test_fraction = 0.2;
  bool stratify = true;
  int bins = 12;  // quantile bins for regression stratification
  bool balance_train = false;  // downsample majority class (classification)
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  // Nonempty when a degenerate stratum forced a fallback or merge.
  std::vector<std::string> notes;
};

// Classification stratifies on the label; regression on quantile bins of the
// target. Strata smaller than 2 merge into a neighbor (regression) or drop
// to an unstratified split (classification). Deterministic under seed.
SplitResult split(const Dataset& data, const SplitOptions& options);

}  // namespace iabma
