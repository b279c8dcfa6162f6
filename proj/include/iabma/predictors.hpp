#pragma once

#include "iabma/core.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace iabma {

enum class PredictorKind { poly_logreg, lda, soft_circle, ridge, knn_reg };

std::string to_string(PredictorKind kind);

// All monomials of the given variables up to `degree`, excluding the constant
// term. Deterministic order: ascending total degree, then exponent vectors
// with earlier variables taking higher powers first.
Eigen::MatrixXd poly_expand(const Eigen::MatrixXd& features, int degree);
int poly_expansion_size(int dims, int degree);

// A fitted desk-scale base predictor. Classifiers emit class probabilities on
// the simplex; regressors emit a point prediction plus a noise scale sigma,
// giving the predictive density Normal(predict(x), sigma^2).
class BasePredictor {
 public:
  PredictorKind kind() const { return kind_; }
  Task task() const;
  const std::string& name() const { return name_; }

  // Classification: probabilities over classes for one input row.
  Eigen::VectorXd class_probs(const Eigen::VectorXd& x) const;
  int num_classes() const { return num_classes_; }

  // Regression point prediction and fitted noise scale.
  double predict(const Eigen::VectorXd& x) const;
  double sigma() const;

  // Training residual scale: plain residuals for ridge, leave-one-out for
  // k-NN (whose self-inclusive residuals are identically zero).
  double training_rmse() const { return training_rmse_; }

  // Regression prediction at training row i with that row excluded for k-NN;
  // identical to predict(features.row(i)) for every other kind.
  double predict_train_loo(const Eigen::VectorXd& x, int train_index) const;

  bool converged() const { return converged_; }

  // log f(y | x), clamped to kLogFloor.
  double loglik(const Eigen::VectorXd& x, double label) const;

  nlohmann::json to_json() const;
  static BasePredictor from_json(const nlohmann::json& j);

  static BasePredictor fit_poly_logreg(const Dataset& data, int degree,
                                       double l2 = 0.0);
  static BasePredictor fit_lda(const Dataset& data);
  static BasePredictor soft_circle(Eigen::Vector2d center, double radius,
                                   double gamma);
  static BasePredictor fit_ridge(const Dataset& data, double alpha);
  static BasePredictor fit_knn_reg(const Dataset& data, int k);

 private:
  BasePredictor() = default;

  PredictorKind kind_ = PredictorKind::poly_logreg;
  std::string name_;
  int num_classes_ = 0;
  bool converged_ = true;
  double training_rmse_ = 0.0;

  // poly_logreg: coef_[0] is the intercept, rest follow poly_expand order.
  int degree_ = 0;
  Eigen::VectorXd coef_;

  // lda
  Eigen::VectorXd mean0_, mean1_;
  Eigen::MatrixXd cov_inverse_;
  double log_prior0_ = 0.0, log_prior1_ = 0.0;

  // soft_circle
  Eigen::Vector2d center_ = Eigen::Vector2d::Zero();
  double radius_ = 1.0;
  double gamma_ = 5.0;

  // ridge
  double intercept_ = 0.0;
  double sigma_ = 1.0;

  // knn_reg
  int k_ = 1;
  Eigen::MatrixXd train_features_;
  Eigen::VectorXd train_labels_;

  double knn_predict(const Eigen::VectorXd& x, int skip_index) const;
};

// Convenience wrappers matching the per-kind fit operations.
BasePredictor fit_poly_logreg(const Dataset& data, int degree,
                              double l2 = 0.0);
BasePredictor fit_lda(const Dataset& data);
double eval_soft_circle(const Eigen::VectorXd& x, const Eigen::Vector2d& center,
                        double radius, double gamma);
BasePredictor fit_ridge(const Dataset& data, double alpha);
BasePredictor fit_knn_reg(const Dataset& data, int k);

// Entry (i, j) = log f_j(y_i | x_i), clamped at the core floor.
LikelihoodTable loglik_table(const std::vector<BasePredictor>& predictors,
                             const Dataset& data);

// Ensemble prediction under per-row weights: mixture class probabilities or
// mixture mean, plus the mixture log-likelihood of the true labels.
MixturePrediction mixture_predict(const std::vector<BasePredictor>& predictors,
                                  const Dataset& data,
                                  const std::vector<SimplexWeights>& row_weights);

// Versioned JSON round-trip for a fitted roster.
nlohmann::json predictors_to_json(const std::vector<BasePredictor>& predictors);
std::vector<BasePredictor> predictors_from_json(const nlohmann::json& j);

}  // namespace iabma
