#include "iabma/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace iabma {

std::string to_string(Task task) {
  return task == Task::classification ? "classification" : "regression";
}

Task task_from_string(const std::string& s) {
  if (s == "classification") return Task::classification;
  if (s == "regression") return Task::regression;
  throw std::invalid_argument("unknown task: " + s);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return splitmix64(master + (stream + 1) * 0x9e3779b97f4a7c15ULL);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
  return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
}

void Rng::shuffle(std::vector<int>& v) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    std::swap(v[i], v[uniform_int(i + 1)]);
  }
}

SimplexWeights::SimplexWeights(Eigen::VectorXd weights)
    : weights_(std::move(weights)) {
  if (weights_.size() < 1) {
    throw std::invalid_argument("SimplexWeights: needs at least one entry");
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < weights_.size(); ++j) {
    const double w = weights_[j];
    if (!std::isfinite(w)) {
      throw std::invalid_argument("SimplexWeights: non-finite entry");
    }
    if (w < -kSimplexTol) {
      throw std::invalid_argument("SimplexWeights: negative entry " +
                                  std::to_string(w));
    }
    if (w < 0.0) weights_[j] = 0.0;
    sum += weights_[j];
  }
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw std::invalid_argument("SimplexWeights: sum " + std::to_string(sum) +
                                " not within tolerance of 1");
  }
  if (sum != 1.0) weights_ /= sum;
}

SimplexWeights SimplexWeights::uniform(int m) {
  if (m < 1) throw std::invalid_argument("SimplexWeights: m must be >= 1");
  return SimplexWeights(Eigen::VectorXd::Constant(m, 1.0 / m));
}

SimplexWeights SimplexWeights::one_hot(int m, int index) {
  if (m < 1 || index < 0 || index >= m) {
    throw std::invalid_argument("SimplexWeights: one_hot index out of range");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  w[index] = 1.0;
  return SimplexWeights(std::move(w));
}

int SimplexWeights::argmax() const {
  int best = 0;
  for (int j = 1; j < size(); ++j) {
    if (weights_[j] > weights_[best]) best = j;
  }
  return best;
}

Dataset Dataset::make_classification(Eigen::MatrixXd features,
                                     std::vector<int> labels, int num_classes,
                                     std::vector<int> region_tags) {
  Dataset data;
  data.features = std::move(features);
  data.task = Task::classification;
  data.labels.resize(static_cast<Eigen::Index>(labels.size()));
  int max_label = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    data.labels[static_cast<Eigen::Index>(i)] = labels[i];
    max_label = std::max(max_label, labels[i]);
  }
  data.num_classes = num_classes > 0 ? num_classes : std::max(2, max_label + 1);
  data.region_tags = std::move(region_tags);
  data.validate();
  return data;
}

Dataset Dataset::make_regression(Eigen::MatrixXd features,
                                 Eigen::VectorXd labels,
                                 std::vector<int> region_tags) {
  Dataset data;
  data.features = std::move(features);
  data.labels = std::move(labels);
  data.task = Task::regression;
  data.num_classes = 0;
  data.region_tags = std::move(region_tags);
  data.validate();
  return data;
}

void Dataset::validate() const {
  const int n = rows();
  if (n < 1 || dims() < 1) {
    throw std::invalid_argument("Dataset: needs n >= 1 and d >= 1");
  }
  if (labels.size() != n) {
    throw std::invalid_argument("Dataset: labels length does not match rows");
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("Dataset: non-finite feature");
  }
  if (task == Task::classification) {
    if (num_classes < 2) {
      throw std::invalid_argument("Dataset: classification needs C >= 2");
    }
    for (int i = 0; i < n; ++i) {
      const double y = labels[i];
      if (y != std::floor(y) || y < 0 || y >= num_classes) {
        throw std::invalid_argument("Dataset: label out of {0..C-1} at row " +
                                    std::to_string(i));
      }
    }
  } else {
    if (!labels.allFinite()) {
      throw std::invalid_argument("Dataset: non-finite regression label");
    }
  }
  if (!region_tags.empty() &&
      region_tags.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("Dataset: region tags length mismatch");
  }
}

LikelihoodTable LikelihoodTable::make(Eigen::MatrixXd raw_loglik,
                                      std::vector<std::string> model_names,
                                      Task task) {
  LikelihoodTable table;
  if (raw_loglik.rows() < 1 || raw_loglik.cols() < 1) {
    throw std::invalid_argument("LikelihoodTable: empty table");
  }
  if (model_names.size() != static_cast<std::size_t>(raw_loglik.cols())) {
    throw std::invalid_argument("LikelihoodTable: model name count mismatch");
  }
  for (Eigen::Index i = 0; i < raw_loglik.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw_loglik.cols(); ++j) {
      double v = raw_loglik(i, j);
      if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
        throw std::invalid_argument("LikelihoodTable: invalid entry at (" +
                                    std::to_string(i) + "," +
                                    std::to_string(j) + ")");
      }
      v = std::max(v, kLogFloor);
      if (task == Task::classification && v > 1e-9) {
        throw std::invalid_argument(
            "LikelihoodTable: classification log-probability above 0 at (" +
            std::to_string(i) + "," + std::to_string(j) + ")");
      }
      raw_loglik(i, j) = v;
    }
  }
  table.loglik = std::move(raw_loglik);
  table.model_names = std::move(model_names);
  table.task = task;
  return table;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("log_sum_exp: empty input");
  }
  double max_value = -std::numeric_limits<double>::infinity();
  for (const double v : values) {
    if (std::isnan(v)) throw std::invalid_argument("log_sum_exp: NaN input");
    max_value = std::max(max_value, v);
  }
  if (max_value == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("log_sum_exp: no finite entry");
  }
  if (values.size() == 1) return values[0];
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - max_value);
  return max_value + std::log(sum);
}

double log_sum_exp(const Eigen::VectorXd& values) {
  return log_sum_exp(std::span<const double>(values.data(),
                                             static_cast<std::size_t>(values.size())));
}

SimplexWeights softmax(const Eigen::VectorXd& energies) {
  if (energies.size() == 0) {
    throw std::invalid_argument("softmax: empty input");
  }
  for (Eigen::Index j = 0; j < energies.size(); ++j) {
    if (std::isnan(energies[j])) {
      throw std::invalid_argument("softmax: NaN input");
    }
  }
  const double lse = log_sum_exp(energies);
  Eigen::VectorXd w(energies.size());
  for (Eigen::Index j = 0; j < energies.size(); ++j) {
    w[j] = std::exp(energies[j] - lse);
  }
  return SimplexWeights(std::move(w));
}

double mixture_loglik(const SimplexWeights& weights,
                      const Eigen::VectorXd& row_logliks) {
  if (weights.size() != row_logliks.size()) {
    throw std::invalid_argument("mixture_loglik: dimension mismatch");
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(weights.size()));
  for (int j = 0; j < weights.size(); ++j) {
    if (weights[j] == 0.0) continue;
    terms.push_back(std::log(weights[j]) + row_logliks[j]);
  }
  return log_sum_exp(terms);
}

}  // namespace iabma
