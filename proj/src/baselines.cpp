#include "iabma/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace iabma {

SimplexWeights weights_uniform(int m) {
  if (m < 1) throw std::invalid_argument("weights_uniform: m must be >= 1");
  return SimplexWeights::uniform(m);
}

SimplexWeights weights_best_single(const LikelihoodTable& train_table) {
  const Eigen::VectorXd totals = train_table.loglik.colwise().sum();
  int best = 0;
  for (int j = 1; j < train_table.models(); ++j) {
    if (totals[j] > totals[best]) best = j;
  }
  return SimplexWeights::one_hot(train_table.models(), best);
}

SimplexWeights weights_accuracy(const LikelihoodTable& train_table,
                                const Dataset& data,
                                const std::vector<BasePredictor>& predictors) {
  const int m = static_cast<int>(predictors.size());
  if (m != train_table.models()) {
    throw std::invalid_argument("weights_accuracy: predictor count mismatch");
  }
  Eigen::VectorXd scores(m);
  if (data.task == Task::classification) {
    for (int j = 0; j < m; ++j) {
      int correct = 0;
      for (int i = 0; i < data.rows(); ++i) {
        const Eigen::VectorXd probs =
            predictors[static_cast<std::size_t>(j)].class_probs(
                data.features.row(i).transpose());
        int argmax = 0;
        for (int c = 1; c < probs.size(); ++c) {
          if (probs[c] > probs[argmax]) argmax = c;
        }
        if (argmax == data.class_label(i)) ++correct;
      }
      scores[j] = static_cast<double>(correct) / data.rows();
    }
  } else {
    for (int j = 0; j < m; ++j) {
      scores[j] = 1.0 / (predictors[static_cast<std::size_t>(j)].training_rmse() + 1e-12);
    }
  }
  const double total = scores.sum();
  if (total <= 0.0) return SimplexWeights::uniform(m);
  return SimplexWeights(scores / total);
}

SimplexWeights weights_bma(const LikelihoodTable& train_table) {
  return softmax(train_table.loglik.colwise().sum());
}

PosteriorNet fit_moe(const Dataset& data, const LikelihoodTable& table,
                     const TrainConfig& cfg) {
  PosteriorNet gate(data.dims(), table.models(), {64, 32, 16}, cfg.seed);
  train_gate(gate, data.features, table.loglik, nullptr,
             GateObjective::mixture_loglik, cfg);
  return gate;
}

void DlaConfig::validate() const {
  if (k < 1) throw std::invalid_argument("DlaConfig: k must be >= 1");
  if (temperature <= 0.0) {
    throw std::invalid_argument("DlaConfig: temperature must be > 0");
  }
  if (smoothing < 0.0) {
    throw std::invalid_argument("DlaConfig: smoothing must be >= 0");
  }
}

SimplexWeights weights_dla(const Dataset& train_data,
                           const LikelihoodTable& train_table,
                           const std::vector<BasePredictor>& predictors,
                           const Eigen::VectorXd& x, int k, double temperature,
                           double smoothing) {
  DlaConfig cfg{k, temperature, smoothing};
  cfg.validate();
  const int n = train_data.rows();
  const int m = train_table.models();
  if (k > n) throw std::invalid_argument("weights_dla: k > n");
  if (static_cast<int>(predictors.size()) != m) {
    throw std::invalid_argument("weights_dla: predictor count mismatch");
  }
  if (x.size() != train_data.dims()) {
    throw std::invalid_argument("weights_dla: query dimension mismatch");
  }

  // Standardize the neighbor metric with training statistics; constant
  // features carry no distance information.
  const Eigen::RowVectorXd mean = train_data.features.colwise().mean();
  Eigen::RowVectorXd stddev(train_data.dims());
  for (int c = 0; c < train_data.dims(); ++c) {
    const double var =
        (train_data.features.col(c).array() - mean[c]).square().mean();
    stddev[c] = std::sqrt(var);
  }
  std::vector<std::pair<double, int>> dists;
  dists.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double dist2 = 0.0;
    for (int c = 0; c < train_data.dims(); ++c) {
      if (stddev[c] == 0.0) continue;
      const double delta = (train_data.features(i, c) - x[c]) / stddev[c];
      dist2 += delta * delta;
    }
    dists.emplace_back(dist2, i);
  }
  std::partial_sort(dists.begin(), dists.begin() + k, dists.end());

  Eigen::VectorXd scores(m);
  if (train_data.task == Task::classification) {
    if (train_data.num_classes != 2) {
      throw TaskError("weights_dla: classification scores assume a binary task");
    }
    const double log_half = std::log(0.5);
    for (int j = 0; j < m; ++j) {
      int correct = 0;
      for (int t = 0; t < k; ++t) {
        const int i = dists[static_cast<std::size_t>(t)].second;
        const double ll = train_table.loglik(i, j);
        // The model's argmax matches the observed label iff its true-label
        // probability exceeds 1/2; an exact tie predicts class 0.
        const bool is_correct =
            ll > log_half || (ll == log_half && train_data.class_label(i) == 0);
        if (is_correct) ++correct;
      }
      scores[j] = (correct + smoothing) / (k + 2.0 * smoothing);
    }
  } else {
    for (int j = 0; j < m; ++j) {
      double sse = 0.0;
      for (int t = 0; t < k; ++t) {
        const int i = dists[static_cast<std::size_t>(t)].second;
        const double prediction = predictors[static_cast<std::size_t>(j)].predict_train_loo(
            train_data.features.row(i).transpose(), i);
        const double r = train_data.labels[i] - prediction;
        sse += r * r;
      }
      scores[j] = -std::sqrt(sse / k);
    }
  }
  return softmax(scores / temperature);
}

}  // namespace iabma
