#include "iabma/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace iabma {

namespace {

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

double normal_loglik(double y, double mean, double sigma) {
  const double z = (y - mean) / sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma) - 0.5 * z * z;
}

void enumerate_exponents(int dims, int degree_left, int var,
                         std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
  if (var == dims - 1) {
    current[static_cast<std::size_t>(var)] = degree_left;
    out.push_back(current);
    return;
  }
  for (int p = degree_left; p >= 0; --p) {
    current[static_cast<std::size_t>(var)] = p;
    enumerate_exponents(dims, degree_left - p, var + 1, current, out);
  }
}

std::vector<std::vector<int>> monomials(int dims, int degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(dims), 0);
  for (int total = 1; total <= degree; ++total) {
    enumerate_exponents(dims, total, 0, current, out);
  }
  return out;
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::poly_logreg: return "poly_logreg";
    case PredictorKind::lda: return "lda";
    case PredictorKind::soft_circle: return "soft_circle";
    case PredictorKind::ridge: return "ridge";
    case PredictorKind::knn_reg: return "knn_reg";
  }
  throw std::logic_error("unreachable");
}

int poly_expansion_size(int dims, int degree) {
  return static_cast<int>(monomials(dims, degree).size());
}

Eigen::MatrixXd poly_expand(const Eigen::MatrixXd& features, int degree) {
  if (degree < 1) throw std::invalid_argument("poly_expand: degree must be >= 1");
  const auto terms = monomials(static_cast<int>(features.cols()), degree);
  Eigen::MatrixXd out(features.rows(), static_cast<Eigen::Index>(terms.size()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    for (std::size_t t = 0; t < terms.size(); ++t) {
      double v = 1.0;
      for (int c = 0; c < features.cols(); ++c) {
        for (int p = 0; p < terms[t][static_cast<std::size_t>(c)]; ++p) {
          v *= features(i, c);
        }
      }
      out(i, static_cast<Eigen::Index>(t)) = v;
    }
  }
  return out;
}

Task BasePredictor::task() const {
  switch (kind_) {
    case PredictorKind::poly_logreg:
    case PredictorKind::lda:
    case PredictorKind::soft_circle:
      return Task::classification;
    case PredictorKind::ridge:
    case PredictorKind::knn_reg:
      return Task::regression;
  }
  throw std::logic_error("unreachable");
}

Eigen::VectorXd BasePredictor::class_probs(const Eigen::VectorXd& x) const {
  if (task() != Task::classification) {
    throw TaskError("class_probs: not a classifier");
  }
  Eigen::VectorXd probs(2);
  switch (kind_) {
    case PredictorKind::poly_logreg: {
      const Eigen::MatrixXd phi = poly_expand(x.transpose(), degree_);
      double z = coef_[0];
      for (Eigen::Index t = 0; t < phi.cols(); ++t) z += coef_[t + 1] * phi(0, t);
      probs[1] = sigmoid(z);
      probs[0] = 1.0 - probs[1];
      break;
    }
    case PredictorKind::lda: {
      if (x.size() != mean0_.size()) {
        throw std::invalid_argument("class_probs: dimension mismatch");
      }
      const Eigen::VectorXd d0 = x - mean0_;
      const Eigen::VectorXd d1 = x - mean1_;
      Eigen::Vector2d scores;
      scores[0] = log_prior0_ - 0.5 * d0.dot(cov_inverse_ * d0);
      scores[1] = log_prior1_ - 0.5 * d1.dot(cov_inverse_ * d1);
      const double p1 = sigmoid(scores[1] - scores[0]);
      probs[0] = 1.0 - p1;
      probs[1] = p1;
      break;
    }
    case PredictorKind::soft_circle: {
      probs[1] = eval_soft_circle(x, center_, radius_, gamma_);
      probs[0] = 1.0 - probs[1];
      break;
    }
    default:
      throw TaskError("class_probs: not a classifier");
  }
  return probs;
}

double BasePredictor::predict(const Eigen::VectorXd& x) const {
  switch (kind_) {
    case PredictorKind::ridge: {
      if (x.size() != coef_.size()) {
        throw std::invalid_argument("predict: dimension mismatch");
      }
      return intercept_ + coef_.dot(x);
    }
    case PredictorKind::knn_reg:
      return knn_predict(x, -1);
    default:
      throw TaskError("predict: not a regressor");
  }
}

double BasePredictor::sigma() const {
  if (task() != Task::regression) throw TaskError("sigma: not a regressor");
  return sigma_;
}

double BasePredictor::predict_train_loo(const Eigen::VectorXd& x,
                                        int train_index) const {
  if (kind_ == PredictorKind::knn_reg) return knn_predict(x, train_index);
  if (task() == Task::regression) return predict(x);
  throw TaskError("predict_train_loo: not a regressor");
}

double BasePredictor::knn_predict(const Eigen::VectorXd& x, int skip_index) const {
  const int n = static_cast<int>(train_features_.rows());
  std::vector<std::pair<double, int>> dists;
  dists.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i == skip_index) continue;
    dists.emplace_back((train_features_.row(i).transpose() - x).norm(), i);
  }
  if (dists.empty()) return train_labels_.mean();
  const int k = std::min<int>(k_, static_cast<int>(dists.size()));
  std::partial_sort(dists.begin(), dists.begin() + k, dists.end());
  double weight_sum = 0.0;
  double value = 0.0;
  for (int t = 0; t < k; ++t) {
    const double w = 1.0 / (dists[static_cast<std::size_t>(t)].first + 1e-12);
    weight_sum += w;
    value += w * train_labels_[dists[static_cast<std::size_t>(t)].second];
  }
  return value / weight_sum;
}

double BasePredictor::loglik(const Eigen::VectorXd& x, double label) const {
  if (task() == Task::classification) {
    const Eigen::VectorXd probs = class_probs(x);
    const int y = static_cast<int>(label);
    if (y < 0 || y >= probs.size()) {
      throw std::invalid_argument("loglik: label out of range");
    }
    return std::max(std::log(probs[y]), kLogFloor);
  }
  return std::max(normal_loglik(label, predict(x), sigma_), kLogFloor);
}

BasePredictor BasePredictor::fit_poly_logreg(const Dataset& data, int degree,
                                              double l2) {
  if (l2 < 0.0) {
    throw std::invalid_argument("fit_poly_logreg: l2 must be >= 0");
  }
  if (data.task != Task::classification || data.num_classes != 2) {
    throw TaskError("fit_poly_logreg: needs binary classification data");
  }
  if (degree < 1 || degree > 3) {
    throw std::invalid_argument("fit_poly_logreg: degree must be in {1,2,3}");
  }
  const Eigen::MatrixXd phi = poly_expand(data.features, degree);
  const int n = data.rows();
  const int p = static_cast<int>(phi.cols());
  if (n <= p) {
    throw std::invalid_argument("fit_poly_logreg: needs n > expanded features");
  }

  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = phi;
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = data.class_label(i);

  // Penalized log-likelihood; the intercept carries no penalty.
  const auto loglik_at = [&](const Eigen::VectorXd& w) {
    double ll = 0.0;
    const Eigen::VectorXd z = design * w;
    for (int i = 0; i < n; ++i) {
      // log sigma(z) = -log(1 + exp(-z)); label 0 flips the sign of z.
      const double zi = y[i] > 0.5 ? z[i] : -z[i];
      ll += zi >= 0.0 ? -std::log1p(std::exp(-zi)) : zi - std::log1p(std::exp(zi));
    }
    return ll - 0.5 * l2 * w.tail(p).squaredNorm();
  };

  // Damped Newton (IRLS with step halving); zero initialization.
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p + 1);
  Eigen::VectorXd best_w = w;
  double best_ll = loglik_at(w);
  bool converged = false;
  for (int iter = 0; iter < 500; ++iter) {
    const Eigen::VectorXd z = design * w;
    Eigen::VectorXd prob(n);
    for (int i = 0; i < n; ++i) prob[i] = sigmoid(z[i]);
    Eigen::VectorXd grad = design.transpose() * (y - prob);
    grad.tail(p) -= l2 * w.tail(p);
    if (grad.norm() <= 1e-6) {
      converged = true;
      break;
    }
    Eigen::MatrixXd hessian = Eigen::MatrixXd::Zero(p + 1, p + 1);
    for (int i = 0; i < n; ++i) {
      const double wi = std::max(prob[i] * (1.0 - prob[i]), 1e-10);
      hessian.noalias() += wi * design.row(i).transpose() * design.row(i);
    }
    hessian.bottomRightCorner(p, p) += l2 * Eigen::MatrixXd::Identity(p, p);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      // Singular expansion; fall back to the raw gradient direction.
      step = grad;
    }
    const double current_ll = loglik_at(w);
    double eta = 1.0;
    while (eta > 1e-6 && loglik_at(w + eta * step) < current_ll) eta *= 0.5;
    w += eta * step;
    const double ll = loglik_at(w);
    if (ll > best_ll) {
      best_ll = ll;
      best_w = w;
    }
  }
  if (converged) best_w = w;

  BasePredictor model;
  model.kind_ = PredictorKind::poly_logreg;
  model.name_ = "poly_logreg_d" + std::to_string(degree);
  model.num_classes_ = 2;
  model.degree_ = degree;
  model.coef_ = best_w;
  model.converged_ = converged;
  return model;
}

BasePredictor BasePredictor::fit_lda(const Dataset& data) {
  if (data.task != Task::classification || data.num_classes != 2) {
    throw TaskError("fit_lda: needs binary classification data");
  }
  const int n = data.rows();
  const int d = data.dims();
  int n0 = 0, n1 = 0;
  for (int i = 0; i < n; ++i) (data.class_label(i) == 0 ? n0 : n1)++;
  if (n0 < 2 || n1 < 2) {
    throw FitError("fit_lda: each class needs at least 2 samples");
  }

  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < n; ++i) {
    (data.class_label(i) == 0 ? mean0 : mean1) += data.features.row(i).transpose();
  }
  mean0 /= n0;
  mean1 /= n1;

  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd diff =
        data.features.row(i).transpose() - (data.class_label(i) == 0 ? mean0 : mean1);
    scatter.noalias() += diff * diff.transpose();
  }
  Eigen::MatrixXd cov = scatter / (n - 2);

  auto try_invert = [&](const Eigen::MatrixXd& m,
                        Eigen::MatrixXd& inverse) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) return false;
    inverse = llt.solve(Eigen::MatrixXd::Identity(d, d));
    return inverse.allFinite();
  };

  Eigen::MatrixXd cov_inverse;
  if (!try_invert(cov, cov_inverse)) {
    cov += 1e-6 * Eigen::MatrixXd::Identity(d, d);
    if (!try_invert(cov, cov_inverse)) {
      throw FitError("fit_lda: pooled covariance singular after jitter");
    }
  }

  BasePredictor model;
  model.kind_ = PredictorKind::lda;
  model.name_ = "lda";
  model.num_classes_ = 2;
  model.mean0_ = std::move(mean0);
  model.mean1_ = std::move(mean1);
  model.cov_inverse_ = std::move(cov_inverse);
  model.log_prior0_ = std::log(static_cast<double>(n0) / n);
  model.log_prior1_ = std::log(static_cast<double>(n1) / n);
  return model;
}

BasePredictor BasePredictor::soft_circle(Eigen::Vector2d center, double radius,
                                         double gamma) {
  if (gamma <= 0.0) {
    throw std::invalid_argument("soft_circle: gamma must be positive");
  }
  BasePredictor model;
  model.kind_ = PredictorKind::soft_circle;
  model.name_ = "soft_circle_g" + format_param(gamma);
  model.num_classes_ = 2;
  model.center_ = std::move(center);
  model.radius_ = radius;
  model.gamma_ = gamma;
  return model;
}

BasePredictor BasePredictor::fit_ridge(const Dataset& data, double alpha) {
  if (data.task != Task::regression) {
    throw TaskError("fit_ridge: needs regression data");
  }
  if (alpha < 0.0) throw std::invalid_argument("fit_ridge: alpha must be >= 0");
  const int n = data.rows();
  const int d = data.dims();

  const Eigen::RowVectorXd x_mean = data.features.colwise().mean();
  const double y_mean = data.labels.mean();
  const Eigen::MatrixXd xc = data.features.rowwise() - x_mean;
  const Eigen::VectorXd yc = data.labels.array() - y_mean;

  const Eigen::MatrixXd gram =
      xc.transpose() * xc + alpha * Eigen::MatrixXd::Identity(d, d);
  const Eigen::VectorXd coef = gram.ldlt().solve(xc.transpose() * yc);

  BasePredictor model;
  model.kind_ = PredictorKind::ridge;
  model.name_ = "ridge_a" + format_param(alpha);
  model.coef_ = coef;
  model.intercept_ = y_mean - x_mean.transpose().dot(coef);

  double sse = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = data.labels[i] - model.predict(data.features.row(i).transpose());
    sse += r * r;
  }
  model.training_rmse_ = std::sqrt(sse / n);
  model.sigma_ = std::max(model.training_rmse_, 1e-3);
  return model;
}

BasePredictor BasePredictor::fit_knn_reg(const Dataset& data, int k) {
  if (data.task != Task::regression) {
    throw TaskError("fit_knn_reg: needs regression data");
  }
  if (k < 1 || k > data.rows()) {
    throw std::invalid_argument("fit_knn_reg: k must satisfy 1 <= k <= n");
  }
  BasePredictor model;
  model.kind_ = PredictorKind::knn_reg;
  model.name_ = "knn_k" + std::to_string(k);
  model.k_ = k;
  model.train_features_ = data.features;
  model.train_labels_ = data.labels;

  // Leave-one-out residuals; self-inclusive ones are identically zero.
  double sse = 0.0;
  for (int i = 0; i < data.rows(); ++i) {
    const double r =
        data.labels[i] - model.knn_predict(data.features.row(i).transpose(), i);
    sse += r * r;
  }
  model.training_rmse_ = std::sqrt(sse / data.rows());
  model.sigma_ = std::max(model.training_rmse_, 1e-3);
  return model;
}

BasePredictor fit_poly_logreg(const Dataset& data, int degree, double l2) {
  return BasePredictor::fit_poly_logreg(data, degree, l2);
}

BasePredictor fit_lda(const Dataset& data) { return BasePredictor::fit_lda(data); }

double eval_soft_circle(const Eigen::VectorXd& x, const Eigen::Vector2d& center,
                        double radius, double gamma) {
  if (x.size() != 2) {
    throw std::invalid_argument("eval_soft_circle: needs a 2-D input");
  }
  if (gamma <= 0.0) {
    throw std::invalid_argument("eval_soft_circle: gamma must be positive");
  }
  const double dist = (x - center).norm();
  return sigmoid(gamma * (radius - dist));
}

BasePredictor fit_ridge(const Dataset& data, double alpha) {
  return BasePredictor::fit_ridge(data, alpha);
}

BasePredictor fit_knn_reg(const Dataset& data, int k) {
  return BasePredictor::fit_knn_reg(data, k);
}

LikelihoodTable loglik_table(const std::vector<BasePredictor>& predictors,
                             const Dataset& data) {
  if (predictors.empty()) {
    throw std::invalid_argument("loglik_table: no predictors");
  }
  for (const auto& model : predictors) {
    if (model.task() != data.task) {
      throw std::invalid_argument("loglik_table: predictor task mismatch");
    }
  }
  Eigen::MatrixXd loglik(data.rows(), static_cast<Eigen::Index>(predictors.size()));
  std::vector<std::string> names;
  names.reserve(predictors.size());
  for (const auto& model : predictors) names.push_back(model.name());
  for (int i = 0; i < data.rows(); ++i) {
    const Eigen::VectorXd x = data.features.row(i).transpose();
    for (std::size_t j = 0; j < predictors.size(); ++j) {
      loglik(i, static_cast<Eigen::Index>(j)) = predictors[j].loglik(x, data.labels[i]);
    }
  }
  return LikelihoodTable::make(std::move(loglik), std::move(names), data.task);
}

MixturePrediction mixture_predict(const std::vector<BasePredictor>& predictors,
                                  const Dataset& data,
                                  const std::vector<SimplexWeights>& row_weights) {
  const int n = data.rows();
  const int m = static_cast<int>(predictors.size());
  if (static_cast<int>(row_weights.size()) != n) {
    throw std::invalid_argument("mixture_predict: weight row count mismatch");
  }
  MixturePrediction out;
  out.task = data.task;
  out.weights = row_weights;
  out.loglik.resize(n);
  if (data.task == Task::classification) {
    out.class_probs.resize(n, data.num_classes);
  } else {
    out.mean.resize(n);
  }
  for (int i = 0; i < n; ++i) {
    if (row_weights[static_cast<std::size_t>(i)].size() != m) {
      throw std::invalid_argument("mixture_predict: weight length mismatch");
    }
    const Eigen::VectorXd x = data.features.row(i).transpose();
    const auto& w = row_weights[static_cast<std::size_t>(i)];
    Eigen::VectorXd row_loglik(m);
    if (data.task == Task::classification) {
      Eigen::VectorXd mix = Eigen::VectorXd::Zero(data.num_classes);
      for (int j = 0; j < m; ++j) {
        const Eigen::VectorXd probs = predictors[static_cast<std::size_t>(j)].class_probs(x);
        mix += w[j] * probs;
        row_loglik[j] = std::max(std::log(probs[data.class_label(i)]), kLogFloor);
      }
      out.class_probs.row(i) = mix.transpose();
    } else {
      double mean = 0.0;
      for (int j = 0; j < m; ++j) {
        const auto& model = predictors[static_cast<std::size_t>(j)];
        mean += w[j] * model.predict(x);
        row_loglik[j] =
            std::max(normal_loglik(data.labels[i], model.predict(x), model.sigma()),
                     kLogFloor);
      }
      out.mean[i] = mean;
    }
    out.loglik[i] = mixture_loglik(w, row_loglik);
  }
  return out;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i];
  return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  nlohmann::json values = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(i, c));
  }
  j["values"] = std::move(values);
  return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  Eigen::MatrixXd m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto& values = j.at("values");
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(i, c) = values[k++];
  }
  return m;
}

}  // namespace

nlohmann::json BasePredictor::to_json() const {
  nlohmann::json j;
  j["kind"] = iabma::to_string(kind_);
  j["name"] = name_;
  switch (kind_) {
    case PredictorKind::poly_logreg:
      j["degree"] = degree_;
      j["coef"] = vector_to_json(coef_);
      j["converged"] = converged_;
      break;
    case PredictorKind::lda:
      j["mean0"] = vector_to_json(mean0_);
      j["mean1"] = vector_to_json(mean1_);
      j["cov_inverse"] = matrix_to_json(cov_inverse_);
      j["log_prior0"] = log_prior0_;
      j["log_prior1"] = log_prior1_;
      break;
    case PredictorKind::soft_circle:
      j["center"] = {center_[0], center_[1]};
      j["radius"] = radius_;
      j["gamma"] = gamma_;
      break;
    case PredictorKind::ridge:
      j["coef"] = vector_to_json(coef_);
      j["intercept"] = intercept_;
      j["sigma"] = sigma_;
      j["training_rmse"] = training_rmse_;
      break;
    case PredictorKind::knn_reg:
      j["k"] = k_;
      j["train_features"] = matrix_to_json(train_features_);
      j["train_labels"] = vector_to_json(train_labels_);
      j["sigma"] = sigma_;
      j["training_rmse"] = training_rmse_;
      break;
  }
  return j;
}

BasePredictor BasePredictor::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind");
  BasePredictor model;
  model.name_ = j.at("name");
  if (kind == "poly_logreg") {
    model.kind_ = PredictorKind::poly_logreg;
    model.num_classes_ = 2;
    model.degree_ = j.at("degree");
    model.coef_ = vector_from_json(j.at("coef"));
    model.converged_ = j.at("converged");
  } else if (kind == "lda") {
    model.kind_ = PredictorKind::lda;
    model.num_classes_ = 2;
    model.mean0_ = vector_from_json(j.at("mean0"));
    model.mean1_ = vector_from_json(j.at("mean1"));
    model.cov_inverse_ = matrix_from_json(j.at("cov_inverse"));
    model.log_prior0_ = j.at("log_prior0");
    model.log_prior1_ = j.at("log_prior1");
  } else if (kind == "soft_circle") {
    model.kind_ = PredictorKind::soft_circle;
    model.num_classes_ = 2;
    model.center_ = Eigen::Vector2d(j.at("center")[0], j.at("center")[1]);
    model.radius_ = j.at("radius");
    model.gamma_ = j.at("gamma");
  } else if (kind == "ridge") {
    model.kind_ = PredictorKind::ridge;
    model.coef_ = vector_from_json(j.at("coef"));
    model.intercept_ = j.at("intercept");
    model.sigma_ = j.at("sigma");
    model.training_rmse_ = j.at("training_rmse");
  } else if (kind == "knn_reg") {
    model.kind_ = PredictorKind::knn_reg;
    model.k_ = j.at("k");
    model.train_features_ = matrix_from_json(j.at("train_features"));
    model.train_labels_ = vector_from_json(j.at("train_labels"));
    model.sigma_ = j.at("sigma");
    model.training_rmse_ = j.at("training_rmse");
  } else {
    throw std::invalid_argument("BasePredictor: unknown kind " + kind);
  }
  return model;
}

nlohmann::json predictors_to_json(const std::vector<BasePredictor>& predictors) {
  nlohmann::json j;
  j["version"] = 1;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& model : predictors) list.push_back(model.to_json());
  j["predictors"] = std::move(list);
  return j;
}

std::vector<BasePredictor> predictors_from_json(const nlohmann::json& j) {
  if (j.at("version") != 1) {
    throw std::invalid_argument("predictors_from_json: unsupported version");
  }
  std::vector<BasePredictor> out;
  for (const auto& item : j.at("predictors")) {
    out.push_back(BasePredictor::from_json(item));
  }
  return out;
}

}  // namespace iabma
