#pragma once

#include "iabma/core.hpp"
#include "iabma/posterior.hpp"
#include "iabma/predictors.hpp"

#include <vector>

namespace iabma {

// Uniform average over predictors.
SimplexWeights weights_uniform(int m);

// One-hot on the model with the highest training total log-likelihood
// (ties pick the lowest index).
SimplexWeights weights_best_single(const LikelihoodTable& train_table);

// Classification: weights proportional to training accuracy; regression:
// proportional to 1 / (training RMSE + 1e-12).
SimplexWeights weights_accuracy(const LikelihoodTable& train_table,
                                const Dataset& data,
                                const std::vector<BasePredictor>& predictors);

// Softmax over total training log-likelihoods (uniform model prior,
// marginal-likelihood proxy).
SimplexWeights weights_bma(const LikelihoodTable& train_table);

// Mixture-of-experts gate over the fixed experts: same architecture as the
// posterior net, trained to maximize the induced mixture log-likelihood.
PosteriorNet fit_moe(const Dataset& data, const LikelihoodTable& table,
                     const TrainConfig& cfg);

struct DlaConfig {
  int k = 50;
  double temperature = 1.0;
  double smoothing = 1.0;

  void validate() const;
};

// Dynamic local accuracy: score each model over the k nearest training
// points (Euclidean metric on standardized features, zero-variance features
// dropped) and softmax the scores at the given temperature. Classification
// scores are Laplace-smoothed local accuracies; regression scores are
// negative local RMSEs (k-NN residuals computed leave-one-out).
SimplexWeights weights_dla(const Dataset& train_data,
                           const LikelihoodTable& train_table,
                           const std::vector<BasePredictor>& predictors,
                           const Eigen::VectorXd& x, int k, double temperature,
                           double smoothing);

}  // namespace iabma
