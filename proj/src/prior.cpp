#include "iabma/prior.hpp"

#include <cmath>
#include <numbers>

namespace iabma {

namespace {

double log_sigmoid(double u) {
  return u >= 0.0 ? -std::log1p(std::exp(-u)) : u - std::log1p(std::exp(u));
}

}  // namespace

void McConfig::validate() const {
  if (num_samples < 1) {
    throw std::invalid_argument("McConfig: num_samples must be >= 1");
  }
  if (!(y_min < y_max)) {
    throw std::invalid_argument("McConfig: needs y_min < y_max");
  }
}

double point_energy_discrete(const BasePredictor& predictor,
                             const Eigen::VectorXd& x, int num_classes) {
  if (predictor.task() != Task::classification) {
    throw TaskError("point_energy_discrete: needs a classification predictor");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("point_energy_discrete: needs num_classes >= 2");
  }
  const Eigen::VectorXd probs = predictor.class_probs(x);
  if (probs.size() != num_classes) {
    throw std::invalid_argument("point_energy_discrete: class count mismatch");
  }
  double energy = 0.0;
  for (int y = 0; y < num_classes; ++y) {
    energy += std::max(std::log(probs[y]), kLogFloor);
  }
  return energy;
}

double point_energy_continuous(const BasePredictor& predictor,
                               const Eigen::VectorXd& x,
                               std::span<const double> samples) {
  if (predictor.task() != Task::regression) {
    throw TaskError("point_energy_continuous: needs a regression predictor");
  }
  if (samples.empty()) {
    throw std::invalid_argument("point_energy_continuous: empty sample set");
  }
  const double prediction = predictor.predict(x);
  double sum = 0.0;
  for (const double y : samples) {
    const double r = y - prediction;
    sum += -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * r * r;
  }
  return sum / static_cast<double>(samples.size());
}

std::vector<double> draw_mc_samples(const McConfig& mc) {
  mc.validate();
  Rng rng(mc.seed);
  std::vector<double> samples(static_cast<std::size_t>(mc.num_samples));
  for (auto& y : samples) y = rng.uniform(mc.y_min, mc.y_max);
  return samples;
}

EnergyCache EnergyCache::discrete(const std::vector<BasePredictor>& predictors,
                                  const Eigen::MatrixXd& train_features,
                                  int num_classes) {
  if (predictors.empty()) {
    throw std::invalid_argument("EnergyCache: no predictors");
  }
  EnergyCache cache;
  const int n = static_cast<int>(train_features.rows());
  const int m = static_cast<int>(predictors.size());
  cache.point_energies_.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = train_features.row(i).transpose();
    for (int j = 0; j < m; ++j) {
      cache.point_energies_(i, j) =
          point_energy_discrete(predictors[static_cast<std::size_t>(j)], x, num_classes);
    }
  }
  cache.totals_ = cache.point_energies_.colwise().sum();
  return cache;
}

EnergyCache EnergyCache::continuous(const std::vector<BasePredictor>& predictors,
                                    const Eigen::MatrixXd& train_features,
                                    const McConfig& mc) {
  if (predictors.empty()) {
    throw std::invalid_argument("EnergyCache: no predictors");
  }
  EnergyCache cache;
  cache.mc_ = mc;
  cache.mc_samples_ = draw_mc_samples(mc);
  const int n = static_cast<int>(train_features.rows());
  const int m = static_cast<int>(predictors.size());
  cache.point_energies_.resize(n, m);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = train_features.row(i).transpose();
    for (int j = 0; j < m; ++j) {
      cache.point_energies_(i, j) = point_energy_continuous(
          predictors[static_cast<std::size_t>(j)], x, cache.mc_samples_);
    }
  }
  cache.totals_ = cache.point_energies_.colwise().sum();
  return cache;
}

SimplexWeights adaptive_prior(const EnergyCache& cache,
                              const Eigen::VectorXd& query_energies) {
  if (query_energies.size() != cache.models()) {
    throw std::invalid_argument("adaptive_prior: dimension mismatch");
  }
  if (!cache.totals().allFinite()) {
    throw std::invalid_argument("adaptive_prior: non-finite totals");
  }
  return softmax(cache.totals() + query_energies);
}

SimplexWeights loo_prior(const EnergyCache& cache, int i) {
  if (i < 0 || i >= cache.points()) {
    throw std::invalid_argument("loo_prior: index out of range");
  }
  // Excluding point i from the training term and reinserting x_i as the
  // query cancel exactly: totals - e_i + e_i.
  return softmax(cache.totals());
}

SimplexWeights training_prior(const EnergyCache& cache, int i) {
  if (i < 0 || i >= cache.points()) {
    throw std::invalid_argument("training_prior: index out of range");
  }
  const Eigen::VectorXd query = cache.point_energies().row(i).transpose();
  if (cache.points() == 1) return softmax(query);
  const Eigen::VectorXd loo_mean =
      (cache.totals() - query) / static_cast<double>(cache.points() - 1);
  return softmax(loo_mean + query);
}

double bernoulli_point_energy(double beta, double x) {
  const double u = beta * x;
  return log_sigmoid(u) + log_sigmoid(-u);
}

std::vector<std::pair<double, double>> bernoulli_demo(
    double beta1, double beta2, double baseline_logodds,
    std::span<const double> x_grid) {
  if (!std::isfinite(beta1) || !std::isfinite(beta2) ||
      !std::isfinite(baseline_logodds)) {
    throw std::invalid_argument("bernoulli_demo: non-finite parameter");
  }
  std::vector<std::pair<double, double>> table;
  table.reserve(x_grid.size());
  for (const double x : x_grid) {
    const double logodds = baseline_logodds + bernoulli_point_energy(beta1, x) -
                           bernoulli_point_energy(beta2, x);
    const double p = 1.0 / (1.0 + std::exp(-logodds));
    table.emplace_back(x, p);
  }
  return table;
}

}  // namespace iabma
