#pragma once

#include "iabma/baselines.hpp"
#include "iabma/core.hpp"
#include "iabma/data.hpp"
#include "iabma/metrics.hpp"
#include "iabma/posterior.hpp"
#include "iabma/predictors.hpp"
#include "iabma/prior.hpp"

#include "json.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iabma {

// One roster entry; fitted against the training split of each repetition.
struct PredictorSpec {
  PredictorKind kind = PredictorKind::poly_logreg;
  int degree = 2;                                    // poly_logreg
  Eigen::Vector2d center = Eigen::Vector2d::Zero();  // soft_circle
  double radius = 1.0;
  double gamma = 5.0;
  double alpha = 0.05;  // ridge
  int k = 3;            // knn_reg

  BasePredictor fit(const Dataset& train) const;
  nlohmann::json to_json() const;
  static PredictorSpec from_json(const nlohmann::json& j);
};

enum class DataSource { simulate, csv };

struct ExperimentConfig {
  DataSource source = DataSource::simulate;
  SimulationConfig simulation;
  std::filesystem::path csv_path;
  CsvSchema schema;
  SplitOptions split_options;
  // CSV runs z-score features (and the regression target) with training
  // statistics; R^2 is scale-invariant, RMSE is then in target-sd units.
  bool standardize = true;

  // Empty roster selects the task default: the two-region classifier bank
  // for simulations, a ridge/k-NN bank for CSV regression.
  std::vector<PredictorSpec> roster;
  std::vector<std::string> methods = {"iabma",    "best_single", "uniform",
                                      "accuracy", "bma",         "moe",
                                      "dla"};

  TrainConfig iabma;
  TrainConfig moe;
  DlaConfig dla;
  int mc_samples = 64;
  int metric_bins = 10;
  int repetitions = 10;
  std::uint64_t master_seed = 0;
  std::filesystem::path out_dir = "out";

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct RepetitionResult {
  int repetition = 0;
  bool ok = false;
  std::string error;
  std::map<std::string, MetricReport> reports;
  std::map<std::string, Theorem1Report> theorem;
  std::vector<EpochStats> iabma_trace;
};

struct AggregateRow {
  std::string method;
  std::string metric;
  double mean = 0.0;
  double sd = 0.0;
};

struct ExperimentResult {
  std::vector<RepetitionResult> repetitions;
  std::vector<AggregateRow> aggregate;
  int failed = 0;
};

// Runs every repetition (seeded via derive_seed(master_seed, r)), writes
// out_dir/rep_<r>/ artifacts plus aggregate.csv, aggregate.txt, and
// manifest.json, and returns the in-memory results. A module error aborts
// only its repetition and is recorded.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Per-repetition orchestration pieces, exposed for tests and the CLI.
struct RepetitionArtifacts {
  Dataset train;
  Dataset test;
  std::vector<BasePredictor> predictors;
  LikelihoodTable train_table;
  LikelihoodTable test_table;
  std::vector<SimplexWeights> priors;  // per training row
  std::map<std::string, std::vector<SimplexWeights>> method_weights;
  std::map<std::string, MixturePrediction> method_predictions;
  std::optional<PosteriorNet> posterior_net;
  std::optional<PosteriorNet> moe_net;
  std::vector<EpochStats> iabma_trace;
  std::vector<EpochStats> moe_trace;
};

RepetitionArtifacts run_repetition(const ExperimentConfig& config, int repetition,
                                   const std::optional<Dataset>& csv_data);

// Plot-ready CSV helpers shared by the CLI.
void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<SimplexWeights>& weights,
                       const std::vector<std::string>& model_names);
std::vector<SimplexWeights> read_weights_csv(const std::filesystem::path& path);
void write_table_csv(const std::filesystem::path& path,
                     const LikelihoodTable& table);
LikelihoodTable read_table_csv(const std::filesystem::path& path, Task task);

std::string format_csv_double(double v);

}  // namespace iabma
