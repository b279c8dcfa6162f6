#include "iabma/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace iabma {

namespace {

// Prior masses enter the objective only through log; the artifact-wide
// log-probability floor keeps the KL pull bounded (lambda * 30 nats) when the
// energy totals saturate the prior to one-hot.
const double kPriorFloor = std::exp(kLogFloor);

Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  return z.array() - log_sum_exp(z);
}

}  // namespace

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) {
    throw std::invalid_argument("TrainConfig: learning rate must be > 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("TrainConfig: batch size must be >= 1");
  }
  if (epochs < 1) {
    throw std::invalid_argument("TrainConfig: epochs must be >= 1");
  }
  if (lambda_kl < 0.0) {
    throw std::invalid_argument("TrainConfig: lambda_kl must be >= 0");
  }
}

PosteriorNet::PosteriorNet(int input_dim, int num_models,
                           std::vector<int> hidden_dims, std::uint64_t seed)
    : init_seed_(seed) {
  if (input_dim < 1 || num_models < 1) {
    throw std::invalid_argument("PosteriorNet: needs input_dim, num_models >= 1");
  }
  for (const int h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("PosteriorNet: hidden dim must be >= 1");
  }
  dims_.push_back(input_dim);
  dims_.insert(dims_.end(), hidden_dims.begin(), hidden_dims.end());
  dims_.push_back(num_models);

  Rng rng(seed);
  const int layers = static_cast<int>(dims_.size()) - 1;
  for (int l = 0; l < layers; ++l) {
    const int fan_in = dims_[static_cast<std::size_t>(l)];
    const int fan_out = dims_[static_cast<std::size_t>(l) + 1];
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(fan_out, fan_in);
    if (l < layers - 1) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (int r = 0; r < fan_out; ++r) {
        for (int c = 0; c < fan_in; ++c) w(r, c) = rng.uniform(-bound, bound);
      }
    }
    // Output layer stays zero: training starts at the uniform posterior.
    weights_.push_back(std::move(w));
    biases_.push_back(Eigen::VectorXd::Zero(fan_out));
  }
}

int PosteriorNet::parameter_count() const {
  int count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    count += static_cast<int>(weights_[l].size() + biases_[l].size());
  }
  return count;
}

Eigen::VectorXd PosteriorNet::log_forward(const Eigen::VectorXd& x) const {
  if (x.size() != input_dim()) {
    throw std::invalid_argument("PosteriorNet: input dimension mismatch");
  }
  Eigen::VectorXd a = x;
  for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
    a = (weights_[l] * a + biases_[l]).cwiseMax(0.0);
  }
  const Eigen::VectorXd z = weights_.back() * a + biases_.back();
  return log_softmax(z);
}

SimplexWeights PosteriorNet::forward(const Eigen::VectorXd& x) const {
  return SimplexWeights(log_forward(x).array().exp());
}

SimplexWeights assign_weights(const PosteriorNet& net, const Eigen::VectorXd& x) {
  return net.forward(x);
}

double kl_divergence(const SimplexWeights& q, const SimplexWeights& prior) {
  if (q.size() != prior.size()) {
    throw std::invalid_argument("kl_divergence: dimension mismatch");
  }
  double kl = 0.0;
  for (int j = 0; j < q.size(); ++j) {
    if (q[j] == 0.0) continue;
    kl += q[j] * (std::log(q[j]) - std::log(std::max(prior[j], kPriorFloor)));
  }
  return kl;
}

double elbo(const SimplexWeights& q, const Eigen::VectorXd& row_logliks,
            const SimplexWeights& prior, double lambda_kl) {
  if (q.size() != row_logliks.size() || q.size() != prior.size()) {
    throw std::invalid_argument("elbo: dimension mismatch");
  }
  double expected = 0.0;
  for (int j = 0; j < q.size(); ++j) expected += q[j] * row_logliks[j];
  return expected - lambda_kl * kl_divergence(q, prior);
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

class GateTrainer {
 public:
  GateTrainer(PosteriorNet& net, const Eigen::MatrixXd& features,
              const Eigen::MatrixXd& loglik,
              const std::vector<SimplexWeights>* priors, GateObjective objective,
              const TrainConfig& cfg)
      : net_(net),
        features_(features),
        loglik_(loglik),
        objective_(objective),
        cfg_(cfg) {
    cfg.validate();
    const int n = static_cast<int>(features.rows());
    const int m = net.num_models();
    // lambda_kl is applied per element: the KL term enters the per-example
    // objective divided by the m model slots, the element-mean reduction
    // convention for KL losses. Tabulated lambda values assume it.
    lambda_eff_ = cfg.lambda_kl / m;
    if (loglik.rows() != n) {
      throw std::invalid_argument("train: table rows misaligned with data");
    }
    if (loglik.cols() != m) {
      throw std::invalid_argument("train: table model count mismatch");
    }
    if (static_cast<int>(features.cols()) != net.input_dim()) {
      throw std::invalid_argument("train: feature dimension mismatch");
    }
    if (objective == GateObjective::elbo) {
      if (priors == nullptr || static_cast<int>(priors->size()) != n) {
        throw std::invalid_argument("train: priors misaligned with data");
      }
      log_priors_.resize(n, m);
      for (int i = 0; i < n; ++i) {
        const auto& p = (*priors)[static_cast<std::size_t>(i)];
        if (p.size() != m) {
          throw std::invalid_argument("train: prior length mismatch");
        }
        for (int j = 0; j < m; ++j) {
          log_priors_(i, j) = std::log(std::max(p[j], kPriorFloor));
        }
      }
    }
    const std::size_t layers = net.weights_.size();
    grad_w_.resize(layers);
    grad_b_.resize(layers);
    adam_mw_.resize(layers);
    adam_vw_.resize(layers);
    adam_mb_.resize(layers);
    adam_vb_.resize(layers);
    for (std::size_t l = 0; l < layers; ++l) {
      grad_w_[l].setZero(net.weights_[l].rows(), net.weights_[l].cols());
      grad_b_[l].setZero(net.biases_[l].size());
      adam_mw_[l] = grad_w_[l];
      adam_vw_[l] = grad_w_[l];
      adam_mb_[l] = grad_b_[l];
      adam_vb_[l] = grad_b_[l];
    }
  }

  TrainResult run() {
    TrainResult result;
    const int n = static_cast<int>(features_.rows());
    const int batch = std::min(cfg_.batch_size, n);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(cfg_.seed);

    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      shuffle_rng.shuffle(order);
      EpochStats stats;
      for (int start = 0; start < n; start += batch) {
        const int count = std::min(batch, n - start);
        zero_grads();
        double batch_objective = 0.0;
        for (int t = 0; t < count; ++t) {
          const int row = order[static_cast<std::size_t>(start + t)];
          RowValue value = accumulate_row(row, 1.0 / count);
          batch_objective += value.objective;
          stats.mean_objective += value.objective;
          stats.mean_kl += value.kl;
          stats.mean_loglik += value.loglik;
        }
        if (!std::isfinite(batch_objective)) {
          throw TrainError("train: non-finite objective in batch starting at " +
                           std::to_string(start) + " of epoch " +
                           std::to_string(epoch + 1));
        }
        adam_step();
      }
      stats.mean_objective /= n;
      stats.mean_kl /= n;
      stats.mean_loglik /= n;
      result.trace.push_back(stats);
    }
    net_.trained_config_ = cfg_;
    return result;
  }

  // Mean objective over all rows at the current parameters, no update.
  double mean_objective() {
    double total = 0.0;
    for (int i = 0; i < features_.rows(); ++i) total += row_value(i).objective;
    return total / static_cast<double>(features_.rows());
  }

  void accumulate_mean_gradient() {
    zero_grads();
    const double scale = 1.0 / static_cast<double>(features_.rows());
    for (int i = 0; i < features_.rows(); ++i) accumulate_row(i, scale);
  }

  const std::vector<Eigen::MatrixXd>& grad_w() const { return grad_w_; }
  const std::vector<Eigen::VectorXd>& grad_b() const { return grad_b_; }

 private:
  struct RowValue {
    double objective = 0.0;
    double kl = 0.0;
    double loglik = 0.0;
  };

  struct ForwardCache {
    std::vector<Eigen::VectorXd> activations;  // a0 .. a_{L-1}
    std::vector<Eigen::VectorXd> pre_acts;     // z1 .. z_{L-1} (hidden only)
    Eigen::VectorXd log_q;
  };

  ForwardCache forward_cached(int row) const {
    ForwardCache cache;
    Eigen::VectorXd a = features_.row(row).transpose();
    cache.activations.push_back(a);
    const std::size_t layers = net_.weights_.size();
    for (std::size_t l = 0; l + 1 < layers; ++l) {
      Eigen::VectorXd z = net_.weights_[l] * a + net_.biases_[l];
      cache.pre_acts.push_back(z);
      a = z.cwiseMax(0.0);
      cache.activations.push_back(a);
    }
    const Eigen::VectorXd z = net_.weights_.back() * a + net_.biases_.back();
    cache.log_q = log_softmax(z);
    return cache;
  }

  RowValue evaluate(int row, const ForwardCache& cache,
                    Eigen::VectorXd* logit_grad) const {
    const int m = net_.num_models();
    const Eigen::VectorXd q = cache.log_q.array().exp();
    RowValue value;
    if (objective_ == GateObjective::elbo) {
      double kl = 0.0;
      double expected = 0.0;
      Eigen::VectorXd g(m);
      for (int j = 0; j < m; ++j) {
        const double log_ratio = cache.log_q[j] - log_priors_(row, j);
        if (q[j] > 0.0) kl += q[j] * log_ratio;
        expected += q[j] * loglik_(row, j);
        g[j] = loglik_(row, j) - lambda_eff_ * (log_ratio + 1.0);
      }
      value.kl = kl;
      value.loglik = expected;
      value.objective = expected - lambda_eff_ * kl;
      if (logit_grad != nullptr) {
        const double mean_g = q.dot(g);
        *logit_grad = q.array() * (g.array() - mean_g);
      }
    } else {
      const Eigen::VectorXd scores = cache.log_q + loglik_.row(row).transpose();
      value.objective = log_sum_exp(scores);
      value.loglik = value.objective;
      if (logit_grad != nullptr) {
        const Eigen::VectorXd responsibilities =
            (scores.array() - value.objective).exp();
        *logit_grad = responsibilities - q;
      }
    }
    return value;
  }

  RowValue row_value(int row) const {
    const ForwardCache cache = forward_cached(row);
    return evaluate(row, cache, nullptr);
  }

  RowValue accumulate_row(int row, double scale) {
    const ForwardCache cache = forward_cached(row);
    Eigen::VectorXd delta;
    const RowValue value = evaluate(row, cache, &delta);
    delta *= scale;
    const int layers = static_cast<int>(net_.weights_.size());
    for (int l = layers - 1; l >= 0; --l) {
      grad_w_[static_cast<std::size_t>(l)].noalias() +=
          delta * cache.activations[static_cast<std::size_t>(l)].transpose();
      grad_b_[static_cast<std::size_t>(l)] += delta;
      if (l > 0) {
        Eigen::VectorXd back = net_.weights_[static_cast<std::size_t>(l)].transpose() * delta;
        const Eigen::VectorXd& z = cache.pre_acts[static_cast<std::size_t>(l) - 1];
        for (Eigen::Index k = 0; k < back.size(); ++k) {
          if (z[k] <= 0.0) back[k] = 0.0;
        }
        delta = std::move(back);
      }
    }
    return value;
  }

  void zero_grads() {
    for (std::size_t l = 0; l < grad_w_.size(); ++l) {
      grad_w_[l].setZero();
      grad_b_[l].setZero();
    }
  }

  void adam_step() {
    ++adam_t_;
    const double correction1 = 1.0 - std::pow(cfg_.adam_beta1, adam_t_);
    const double correction2 = 1.0 - std::pow(cfg_.adam_beta2, adam_t_);
    for (std::size_t l = 0; l < grad_w_.size(); ++l) {
      adam_mw_[l] = cfg_.adam_beta1 * adam_mw_[l] + (1.0 - cfg_.adam_beta1) * grad_w_[l];
      adam_vw_[l] = cfg_.adam_beta2 * adam_vw_[l].array().matrix() +
                    (1.0 - cfg_.adam_beta2) * grad_w_[l].array().square().matrix();
      adam_mb_[l] = cfg_.adam_beta1 * adam_mb_[l] + (1.0 - cfg_.adam_beta1) * grad_b_[l];
      adam_vb_[l] = cfg_.adam_beta2 * adam_vb_[l].array().matrix() +
                    (1.0 - cfg_.adam_beta2) * grad_b_[l].array().square().matrix();
      // Ascent on the objective.
      net_.weights_[l].array() +=
          cfg_.learning_rate * (adam_mw_[l].array() / correction1) /
          ((adam_vw_[l].array() / correction2).sqrt() + cfg_.adam_eps);
      net_.biases_[l].array() +=
          cfg_.learning_rate * (adam_mb_[l].array() / correction1) /
          ((adam_vb_[l].array() / correction2).sqrt() + cfg_.adam_eps);
    }
  }

  PosteriorNet& net_;
  const Eigen::MatrixXd& features_;
  const Eigen::MatrixXd& loglik_;
  Eigen::MatrixXd log_priors_;
  GateObjective objective_;
  TrainConfig cfg_;
  double lambda_eff_ = 0.0;

  std::vector<Eigen::MatrixXd> grad_w_, adam_mw_, adam_vw_;
  std::vector<Eigen::VectorXd> grad_b_, adam_mb_, adam_vb_;
  long adam_t_ = 0;
};

nlohmann::json PosteriorNet::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["dims"] = dims_;
  j["seed"] = init_seed_;
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    nlohmann::json layer;
    nlohmann::json w = nlohmann::json::array();
    for (Eigen::Index r = 0; r < weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < weights_[l].cols(); ++c) {
        w.push_back(weights_[l](r, c));  // row-major
      }
    }
    nlohmann::json b = nlohmann::json::array();
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) b.push_back(biases_[l][r]);
    layer["weights"] = std::move(w);
    layer["biases"] = std::move(b);
    layers.push_back(std::move(layer));
  }
  j["layers"] = std::move(layers);
  if (trained_config_) {
    const TrainConfig& cfg = *trained_config_;
    j["config"] = {{"learning_rate", cfg.learning_rate},
                   {"batch_size", cfg.batch_size},
                   {"epochs", cfg.epochs},
                   {"lambda_kl", cfg.lambda_kl},
                   {"adam_beta1", cfg.adam_beta1},
                   {"adam_beta2", cfg.adam_beta2},
                   {"adam_eps", cfg.adam_eps},
                   {"seed", cfg.seed}};
  }
  return j;
}

PosteriorNet PosteriorNet::from_json(const nlohmann::json& j) {
  if (j.at("version") != 1) {
    throw std::invalid_argument("PosteriorNet: unsupported version");
  }
  const std::vector<int> dims = j.at("dims").get<std::vector<int>>();
  if (dims.size() < 2) {
    throw std::invalid_argument("PosteriorNet: bad architecture");
  }
  const std::vector<int> hidden(dims.begin() + 1, dims.end() - 1);
  PosteriorNet net(dims.front(), dims.back(), hidden,
                   j.at("seed").get<std::uint64_t>());
  const auto& layers = j.at("layers");
  if (layers.size() != net.weights_.size()) {
    throw std::invalid_argument("PosteriorNet: layer count mismatch");
  }
  for (std::size_t l = 0; l < net.weights_.size(); ++l) {
    const auto& w = layers[l].at("weights");
    if (w.size() != static_cast<std::size_t>(net.weights_[l].size())) {
      throw std::invalid_argument("PosteriorNet: weight count mismatch");
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < net.weights_[l].rows(); ++r) {
      for (Eigen::Index c = 0; c < net.weights_[l].cols(); ++c) {
        net.weights_[l](r, c) = w[k++];
      }
    }
    const auto& b = layers[l].at("biases");
    if (b.size() != static_cast<std::size_t>(net.biases_[l].size())) {
      throw std::invalid_argument("PosteriorNet: bias count mismatch");
    }
    for (Eigen::Index r = 0; r < net.biases_[l].size(); ++r) {
      net.biases_[l][r] = b[static_cast<std::size_t>(r)];
    }
  }
  if (j.contains("config")) {
    TrainConfig cfg;
    const auto& c = j.at("config");
    cfg.learning_rate = c.at("learning_rate");
    cfg.batch_size = c.at("batch_size");
    cfg.epochs = c.at("epochs");
    cfg.lambda_kl = c.at("lambda_kl");
    cfg.adam_beta1 = c.at("adam_beta1");
    cfg.adam_beta2 = c.at("adam_beta2");
    cfg.adam_eps = c.at("adam_eps");
    cfg.seed = c.at("seed").get<std::uint64_t>();
    net.trained_config_ = cfg;
  }
  return net;
}

TrainResult train_gate(PosteriorNet& net, const Eigen::MatrixXd& features,
                       const Eigen::MatrixXd& loglik,
                       const std::vector<SimplexWeights>* priors,
                       GateObjective objective, const TrainConfig& cfg) {
  GateTrainer trainer(net, features, loglik, priors, objective, cfg);
  return trainer.run();
}

TrainResult train(PosteriorNet& net, const Dataset& data,
                  const LikelihoodTable& table,
                  const std::vector<SimplexWeights>& priors,
                  const TrainConfig& cfg) {
  if (table.rows() != data.rows()) {
    throw std::invalid_argument("train: table misaligned with data");
  }
  return train_gate(net, data.features, table.loglik, &priors,
                    GateObjective::elbo, cfg);
}

double grad_check(const PosteriorNet& net, const Eigen::MatrixXd& features,
                  const Eigen::MatrixXd& loglik,
                  const std::vector<SimplexWeights>* priors,
                  GateObjective objective, double lambda_kl) {
  PosteriorNet work = net;
  TrainConfig cfg;
  cfg.lambda_kl = lambda_kl;
  GateTrainer trainer(work, features, loglik, priors, objective, cfg);
  trainer.accumulate_mean_gradient();
  const auto analytic_w = trainer.grad_w();
  const auto analytic_b = trainer.grad_b();

  constexpr double kStep = 1e-5;
  double max_error = 0.0;
  const auto update_error = [&](double analytic, double numeric) {
    const double denom = std::max(1e-3, std::abs(analytic) + std::abs(numeric));
    max_error = std::max(max_error, std::abs(analytic - numeric) / denom);
  };

  const auto objective_at = [&]() {
    GateTrainer probe(work, features, loglik, priors, objective, cfg);
    return probe.mean_objective();
  };

  const auto central_difference = [&](double& param) {
    const double saved = param;
    param = saved + kStep;
    const double upper = objective_at();
    param = saved - kStep;
    const double lower = objective_at();
    param = saved;
    return (upper - lower) / (2.0 * kStep);
  };

  for (std::size_t l = 0; l < analytic_w.size(); ++l) {
    Eigen::MatrixXd& w = work.weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        update_error(analytic_w[l](r, c), central_difference(w(r, c)));
      }
    }
    Eigen::VectorXd& b = work.biases_[l];
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      update_error(analytic_b[l][r], central_difference(b[r]));
    }
  }
  return max_error;
}

}  // namespace iabma
