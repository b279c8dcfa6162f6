#pragma once

#include "iabma/core.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace iabma {

struct BinStats {
  double lower = 0.0;
  double upper = 0.0;
  int count = 0;
  double value = 0.0;  // mean |acc - conf| contribution or error rate
};

struct MetricReport {
  Task task = Task::classification;
  std::string method;
  int repetition = 0;
  double accuracy = 0.0;
  double ece = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double mean_loglik = 0.0;
  std::vector<BinStats> confidence_bins;  // classification only

  nlohmann::json to_json() const;
  // Flat row for cross-repetition aggregation.
  static std::string csv_header();
  std::string csv_row() const;
};

// Fraction of rows where the argmax class (ties pick the lowest index)
// equals the label.
double accuracy(const Eigen::MatrixXd& pred_probs, const Eigen::VectorXd& labels);

// Expected calibration error over equal-width confidence bins on [0.5, 1],
// binary task, confidence = max(p, 1-p).
double ece(const Eigen::VectorXd& class1_probs, const Eigen::VectorXd& labels,
           int bins);

// (rmse, r2); SST = 0 defines r2 = 0.
std::pair<double, double> rmse_r2(const Eigen::VectorXd& preds,
                                  const Eigen::VectorXd& labels);

// Misclassification rate and count per equal-width bin of |p - 0.5|.
std::vector<BinStats> confidence_bin_errors(const Eigen::VectorXd& class1_probs,
                                            const Eigen::VectorXd& labels,
                                            int bins);

struct Theorem1Report {
  // Largest over rows of max_k (log w_k + l_k - mixture_loglik); any value
  // above tolerance is an inequality violation.
  double max_violation = 0.0;
  std::vector<double> per_row_violation;
  // Aggregate inequality with the argmax selector j*(x) = argmax_j w_j(x).
  double mean_mixture_loglik = 0.0;
  double mean_selected_loglik = 0.0;
  double mean_selected_log_weight = 0.0;
  double aggregate_slack = 0.0;  // lhs - rhs, >= 0 when the bound holds
};

// Verifies, for every row and every model k, that the mixture log-likelihood
// dominates log w_k + l_k, and reports the aggregate argmax-selector bound.
Theorem1Report theorem1_check(const std::vector<SimplexWeights>& weights,
                              const LikelihoodTable& table);

// Full per-method evaluation against a mixture prediction.
MetricReport evaluate(const MixturePrediction& prediction, const Dataset& data,
                      int bins, const std::string& method, int repetition);

}  // namespace iabma
