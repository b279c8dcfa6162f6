#pragma once

#include "iabma/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace iabma {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 64;
  int epochs = 10;
  // Weight on the KL term. Enters each per-example objective as
  // lambda_kl / m (element-mean reduction over the m model slots), the
  // convention the tabulated values are calibrated to.
  double lambda_kl = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Gate training objectives: the ELBO (posterior learning against per-row
// priors) or the induced mixture log-likelihood (mixture-of-experts gate
// over fixed experts).
enum class GateObjective { elbo, mixture_loglik };

// Feed-forward gating network: input -> hidden layers (ReLU) -> softmax over
// the m models. Hidden layers use fan-in-scaled uniform initialization; the
// output layer starts at zero, so an untrained net is the uniform posterior
// for every input.
class PosteriorNet {
 public:
  PosteriorNet(int input_dim, int num_models,
               std::vector<int> hidden_dims = {64, 32, 16},
               std::uint64_t seed = 0);

  int input_dim() const { return dims_.front(); }
  int num_models() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  int parameter_count() const;
  std::uint64_t init_seed() const { return init_seed_; }

  SimplexWeights forward(const Eigen::VectorXd& x) const;

  // Log-softmax output; what training consumes.
  Eigen::VectorXd log_forward(const Eigen::VectorXd& x) const;

  nlohmann::json to_json() const;
  static PosteriorNet from_json(const nlohmann::json& j);

 private:
  friend class GateTrainer;
  friend double grad_check(const PosteriorNet&, const Eigen::MatrixXd&,
                           const Eigen::MatrixXd&,
                           const std::vector<SimplexWeights>*, GateObjective,
                           double);

  std::vector<int> dims_;
  std::vector<Eigen::MatrixXd> weights_;  // per layer: out x in
  std::vector<Eigen::VectorXd> biases_;
  std::uint64_t init_seed_ = 0;
  std::optional<TrainConfig> trained_config_;
};

// Trained weight assignment alpha(x) = q(J = .; x); identical to forward.
SimplexWeights assign_weights(const PosteriorNet& net, const Eigen::VectorXd& x);

// sum_j q_j l_j - lambda_kl * sum_j q_j log(q_j / p_j), with 0 log 0 = 0 and
// prior entries floored at 1e-300.
double elbo(const SimplexWeights& q, const Eigen::VectorXd& row_logliks,
            const SimplexWeights& prior, double lambda_kl);

// KL(q || p) with the same conventions; always >= 0.
double kl_divergence(const SimplexWeights& q, const SimplexWeights& prior);

struct EpochStats {
  double mean_objective = 0.0;
  double mean_kl = 0.0;
  double mean_loglik = 0.0;
};

struct TrainResult {
  std::vector<EpochStats> trace;  // one entry per epoch
};

// Minibatch Adam ascent on the mean objective with per-epoch shuffling under
// cfg.seed. Gradients are analytic through the softmax head, affine layers,
// and rectifier. batch_size >= n gives the full-batch special case. `priors`
// is required for the ELBO objective and ignored for mixture_loglik.
TrainResult train_gate(PosteriorNet& net, const Eigen::MatrixXd& features,
                       const Eigen::MatrixXd& loglik,
                       const std::vector<SimplexWeights>* priors,
                       GateObjective objective, const TrainConfig& cfg);

// The amortized posterior of the averaging method: ELBO training against the
// cached per-row priors.
TrainResult train(PosteriorNet& net, const Dataset& data,
                  const LikelihoodTable& table,
                  const std::vector<SimplexWeights>& priors,
                  const TrainConfig& cfg);

// Max relative error between analytic gradients of the mean objective and
// central finite differences (step 1e-5), over every parameter coordinate;
// the relative denominator is floored at 1e-3 so dead coordinates compare
// absolutely. Intended for small instances (<= 8 rows, ~1e3 parameters).
double grad_check(const PosteriorNet& net, const Eigen::MatrixXd& features,
                  const Eigen::MatrixXd& loglik,
                  const std::vector<SimplexWeights>* priors,
                  GateObjective objective, double lambda_kl);

}  // namespace iabma
