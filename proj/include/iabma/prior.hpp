#pragma once

#include "iabma/core.hpp"
#include "iabma/predictors.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace iabma {

// Monte-Carlo settings for the continuous-outcome energy. One shared sample
// set is drawn per experiment and reused for every (point, model) pair, so
// sampling noise cancels out of energy differences.
struct McConfig {
  int num_samples = 64;
  double y_min = 0.0;
  double y_max = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-point, per-model energies e(i, j) and their column totals. Discrete
// mode stores the exact finite sum over outcomes; continuous mode stores the
// shared-sample Monte-Carlo average.
class EnergyCache {
 public:
  static EnergyCache discrete(const std::vector<BasePredictor>& predictors,
                              const Eigen::MatrixXd& train_features,
                              int num_classes);
  static EnergyCache continuous(const std::vector<BasePredictor>& predictors,
                                const Eigen::MatrixXd& train_features,
                                const McConfig& mc);

  int points() const { return static_cast<int>(point_energies_.rows()); }
  int models() const { return static_cast<int>(point_energies_.cols()); }
  const Eigen::MatrixXd& point_energies() const { return point_energies_; }
  const Eigen::VectorXd& totals() const { return totals_; }
  const std::optional<McConfig>& mc() const { return mc_; }
  const std::vector<double>& mc_samples() const { return mc_samples_; }

 private:
  Eigen::MatrixXd point_energies_;  // n x m
  Eigen::VectorXd totals_;          // m, column sums
  std::optional<McConfig> mc_;
  std::vector<double> mc_samples_;
};

// Sum over all outcome classes of log p(y | x, f), each term clamped at the
// core floor.
double point_energy_discrete(const BasePredictor& predictor,
                             const Eigen::VectorXd& x, int num_classes);

// Mean over the shared samples of the unit-variance Normal log-likelihood
// centered at the model's prediction.
double point_energy_continuous(const BasePredictor& predictor,
                               const Eigen::VectorXd& x,
                               std::span<const double> samples);

// Uniform outcome samples on [y_min, y_max] for the cache and the point
// energy above; deterministic under mc.seed.
std::vector<double> draw_mc_samples(const McConfig& mc);

// softmax_j(totals_j + query_energy_j), log-sum-exp stabilized.
SimplexWeights adaptive_prior(const EnergyCache& cache,
                              const Eigen::VectorXd& query_energies);

// Prior with training point i excluded and x_i reinserted as the query. The
// two moves cancel exactly, so this is softmax(totals) for every i; kept as
// its own operation because callers reason about it per point.
SimplexWeights loo_prior(const EnergyCache& cache, int i);

// The prior the posterior trains against: the leave-one-out training energy
// enters as a per-point mean rather than a sum, keeping it on the same scale
// as the query energy at x_i. Raw sums grow linearly in n and saturate the
// softmax to one-hot, which leaves the KL term nothing to moderate.
SimplexWeights training_prior(const EnergyCache& cache, int i);

// Two-model Bernoulli log-odds table: for each x,
// p(J=1) = sigmoid(baseline_logodds + l(beta1, x) - l(beta2, x)) with
// l(beta, x) = log sigmoid(beta x) + log(1 - sigmoid(beta x)).
std::vector<std::pair<double, double>> bernoulli_demo(
    double beta1, double beta2, double baseline_logodds,
    std::span<const double> x_grid);

// The closed-form log-energy l(beta, x) of the two-model demo.
double bernoulli_point_energy(double beta, double x);

}  // namespace iabma
