#include "iabma/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace iabma {

namespace {

int argmax_row(const Eigen::MatrixXd& probs, int row) {
  int best = 0;
  for (int c = 1; c < probs.cols(); ++c) {
    if (probs(row, c) > probs(row, best)) best = c;
  }
  return best;
}

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double accuracy(const Eigen::MatrixXd& pred_probs, const Eigen::VectorXd& labels) {
  if (pred_probs.rows() != labels.size() || pred_probs.rows() == 0) {
    throw std::invalid_argument("accuracy: misaligned inputs");
  }
  int correct = 0;
  for (int i = 0; i < pred_probs.rows(); ++i) {
    if (argmax_row(pred_probs, i) == static_cast<int>(labels[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(pred_probs.rows());
}

double ece(const Eigen::VectorXd& class1_probs, const Eigen::VectorXd& labels,
           int bins) {
  if (class1_probs.size() != labels.size() || class1_probs.size() == 0) {
    throw std::invalid_argument("ece: misaligned inputs");
  }
  if (bins < 1) throw std::invalid_argument("ece: bins must be >= 1");
  for (int i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw TaskError("ece: needs a binary task");
    }
  }
  const int n = static_cast<int>(class1_probs.size());
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  std::vector<double> conf_sum(static_cast<std::size_t>(bins), 0.0);
  std::vector<int> correct(static_cast<std::size_t>(bins), 0);
  for (int i = 0; i < n; ++i) {
    const double p = class1_probs[i];
    const double conf = std::max(p, 1.0 - p);
    const int pred = p > 0.5 ? 1 : 0;  // tie predicts class 0
    int b = static_cast<int>((conf - 0.5) * 2.0 * bins);
    b = std::clamp(b, 0, bins - 1);
    counts[static_cast<std::size_t>(b)]++;
    conf_sum[static_cast<std::size_t>(b)] += conf;
    if (pred == static_cast<int>(labels[i])) correct[static_cast<std::size_t>(b)]++;
  }
  double total = 0.0;
  for (int b = 0; b < bins; ++b) {
    const int nb = counts[static_cast<std::size_t>(b)];
    if (nb == 0) continue;
    const double acc_b = static_cast<double>(correct[static_cast<std::size_t>(b)]) / nb;
    const double conf_b = conf_sum[static_cast<std::size_t>(b)] / nb;
    total += (static_cast<double>(nb) / n) * std::abs(acc_b - conf_b);
  }
  return total;
}

std::pair<double, double> rmse_r2(const Eigen::VectorXd& preds,
                                  const Eigen::VectorXd& labels) {
  if (preds.size() != labels.size()) {
    throw std::invalid_argument("rmse_r2: misaligned inputs");
  }
  if (preds.size() < 2) {
    throw std::invalid_argument("rmse_r2: needs n >= 2");
  }
  const double sse = (preds - labels).squaredNorm();
  const double rmse = std::sqrt(sse / static_cast<double>(preds.size()));
  const double mean = labels.mean();
  const double sst = (labels.array() - mean).square().sum();
  const double r2 = sst == 0.0 ? 0.0 : 1.0 - sse / sst;
  return {rmse, r2};
}

std::vector<BinStats> confidence_bin_errors(const Eigen::VectorXd& class1_probs,
                                            const Eigen::VectorXd& labels,
                                            int bins) {
  if (class1_probs.size() != labels.size() || class1_probs.size() == 0) {
    throw std::invalid_argument("confidence_bin_errors: misaligned inputs");
  }
  if (bins < 1) {
    throw std::invalid_argument("confidence_bin_errors: bins must be >= 1");
  }
  for (int i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0) {
      throw TaskError("confidence_bin_errors: needs a binary task");
    }
  }
  std::vector<BinStats> table(static_cast<std::size_t>(bins));
  std::vector<int> errors(static_cast<std::size_t>(bins), 0);
  for (int b = 0; b < bins; ++b) {
    table[static_cast<std::size_t>(b)].lower = 0.5 * b / bins;
    table[static_cast<std::size_t>(b)].upper = 0.5 * (b + 1) / bins;
  }
  for (int i = 0; i < class1_probs.size(); ++i) {
    const double p = class1_probs[i];
    const double conf = std::abs(p - 0.5);
    int b = static_cast<int>(conf * 2.0 * bins);
    b = std::clamp(b, 0, bins - 1);
    const int pred = p > 0.5 ? 1 : 0;
    table[static_cast<std::size_t>(b)].count++;
    if (pred != static_cast<int>(labels[i])) errors[static_cast<std::size_t>(b)]++;
  }
  for (int b = 0; b < bins; ++b) {
    auto& bin = table[static_cast<std::size_t>(b)];
    bin.value = bin.count == 0
                    ? 0.0
                    : static_cast<double>(errors[static_cast<std::size_t>(b)]) / bin.count;
  }
  return table;
}

Theorem1Report theorem1_check(const std::vector<SimplexWeights>& weights,
                              const LikelihoodTable& table) {
  const int n = table.rows();
  const int m = table.models();
  if (static_cast<int>(weights.size()) != n) {
    throw std::invalid_argument("theorem1_check: weight row count mismatch");
  }
  Theorem1Report report;
  report.per_row_violation.resize(static_cast<std::size_t>(n));
  report.max_violation = -std::numeric_limits<double>::infinity();
  double sum_mixture = 0.0;
  double sum_selected_loglik = 0.0;
  double sum_selected_log_weight = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto& w = weights[static_cast<std::size_t>(i)];
    if (w.size() != m) {
      throw std::invalid_argument("theorem1_check: weight length mismatch");
    }
    const Eigen::VectorXd row = table.loglik.row(i).transpose();
    const double mixture = mixture_loglik(w, row);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
      if (w[k] == 0.0) continue;  // log 0 makes the bound vacuous
      worst = std::max(worst, std::log(w[k]) + row[k] - mixture);
    }
    report.per_row_violation[static_cast<std::size_t>(i)] = worst;
    report.max_violation = std::max(report.max_violation, worst);
    const int selected = w.argmax();
    sum_mixture += mixture;
    sum_selected_loglik += row[selected];
    sum_selected_log_weight += std::log(w[selected]);
  }
  report.mean_mixture_loglik = sum_mixture / n;
  report.mean_selected_loglik = sum_selected_loglik / n;
  report.mean_selected_log_weight = sum_selected_log_weight / n;
  report.aggregate_slack =
      report.mean_mixture_loglik -
      (report.mean_selected_loglik + report.mean_selected_log_weight);
  return report;
}

MetricReport evaluate(const MixturePrediction& prediction, const Dataset& data,
                      int bins, const std::string& method, int repetition) {
  if (prediction.task != data.task) {
    throw std::invalid_argument("evaluate: task mismatch");
  }
  MetricReport report;
  report.task = data.task;
  report.method = method;
  report.repetition = repetition;
  report.mean_loglik = prediction.loglik.mean();
  if (data.task == Task::classification) {
    report.accuracy = accuracy(prediction.class_probs, data.labels);
    if (data.num_classes == 2) {
      report.ece = ece(prediction.class_probs.col(1), data.labels, bins);
      report.confidence_bins =
          confidence_bin_errors(prediction.class_probs.col(1), data.labels, bins);
    }
  } else {
    const auto [rmse, r2] = rmse_r2(prediction.mean, data.labels);
    report.rmse = rmse;
    report.r2 = r2;
  }
  return report;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j;
  j["task"] = iabma::to_string(task);
  j["method"] = method;
  j["repetition"] = repetition;
  j["mean_loglik"] = mean_loglik;
  if (task == Task::classification) {
    j["accuracy"] = accuracy;
    j["ece"] = ece;
    nlohmann::json bins = nlohmann::json::array();
    for (const auto& bin : confidence_bins) {
      bins.push_back({{"lower", bin.lower},
                      {"upper", bin.upper},
                      {"count", bin.count},
                      {"error_rate", bin.value}});
    }
    j["confidence_bins"] = std::move(bins);
  } else {
    j["rmse"] = rmse;
    j["r2"] = r2;
  }
  return j;
}

std::string MetricReport::csv_header() {
  return "method,repetition,task,accuracy,ece,rmse,r2,mean_loglik";
}

std::string MetricReport::csv_row() const {
  std::string row = method + ',' + std::to_string(repetition) + ',' +
                    iabma::to_string(task);
  for (const double v : {accuracy, ece, rmse, r2, mean_loglik}) {
    row += ',' + format_value(v);
  }
  return row;
}

}  // namespace iabma
