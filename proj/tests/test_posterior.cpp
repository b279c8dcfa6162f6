#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iabma/data.hpp"
#include "iabma/posterior.hpp"
#include "iabma/predictors.hpp"
#include "iabma/prior.hpp"

#include <cmath>

using namespace iabma;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double value : values) v[i++] = value;
  return v;
}

SimplexWeights random_simplex(Rng& rng, int m) {
  Eigen::VectorXd e(m);
  for (int j = 0; j < m; ++j) e[j] = rng.gaussian();
  return softmax(e);
}

struct SmallProblem {
  Eigen::MatrixXd features;
  Eigen::MatrixXd loglik;
  std::vector<SimplexWeights> priors;
};

SmallProblem make_problem(int n, int d, int m, std::uint64_t seed) {
  SmallProblem problem;
  Rng rng(seed);
  problem.features.resize(n, d);
  problem.loglik.resize(n, m);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) problem.features(i, c) = rng.gaussian();
    for (int j = 0; j < m; ++j) problem.loglik(i, j) = rng.uniform(-4.0, 0.0);
    problem.priors.push_back(random_simplex(rng, m));
  }
  return problem;
}

}  // namespace

TEST_CASE("zero-initialized output layer gives the uniform posterior") {
  const PosteriorNet net(3, 5, {64, 32, 16}, 42);
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(3);
    for (int c = 0; c < 3; ++c) x[c] = rng.uniform(-3.0, 3.0);
    const SimplexWeights w = net.forward(x);
    for (int j = 0; j < 5; ++j) CHECK(w[j] == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("forward output always lies on the simplex") {
  const PosteriorNet net(2, 4, {8, 6}, 7);
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd x(2);
    x << rng.uniform(-1e6, 1e6), rng.uniform(-1e6, 1e6);
    const SimplexWeights w = net.forward(x);  // validates on construction
    CHECK(std::isfinite(w.values().sum()));
    CHECK(w.values().sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK_THROWS_AS(net.forward(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST_CASE("parameter count matches the architecture formula") {
  const PosteriorNet net(2, 5, {64, 32, 16}, 0);
  const int expected = (2 * 64 + 64) + (64 * 32 + 32) + (32 * 16 + 16) +
                       (16 * 5 + 5);
  CHECK(net.parameter_count() == expected);
}

TEST_CASE("seeded nets replay bit-identically") {
  const PosteriorNet a(4, 3, {16, 8}, 99);
  const PosteriorNet b(4, 3, {16, 8}, 99);
  const PosteriorNet c(4, 3, {16, 8}, 100);
  Eigen::VectorXd x(4);
  x << 0.3, -1.2, 0.8, 2.0;
  CHECK(a.log_forward(x) == b.log_forward(x));
  CHECK(a.to_json() == b.to_json());
  // The zero output layer hides hidden-layer differences from forward; the
  // seed must still change the hidden initialization itself.
  CHECK(a.to_json().at("layers")[0] != c.to_json().at("layers")[0]);
}

TEST_CASE("elbo closed forms") {
  const SimplexWeights prior(vec({0.25, 0.75}));
  const Eigen::VectorXd ell = vec({-1.0, -2.0});

  // q = prior: the KL term vanishes.
  CHECK(elbo(prior, ell, prior, 0.7) ==
        doctest::Approx(0.25 * -1.0 + 0.75 * -2.0).epsilon(1e-12));

  // One-hot q on model k: l_k - lambda log(1 / p_k).
  const SimplexWeights onehot = SimplexWeights::one_hot(2, 0);
  const double lambda = 0.3;
  CHECK(elbo(onehot, ell, prior, lambda) ==
        doctest::Approx(-1.0 - lambda * std::log(1.0 / 0.25)).epsilon(1e-12));

  CHECK_THROWS_AS(elbo(onehot, vec({-1.0, -2.0, -3.0}), prior, 0.1),
                  std::invalid_argument);
}

TEST_CASE("lambda zero elbo is maximized at the argmax vertex") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + rng.uniform_int(4);
    Eigen::VectorXd ell(m);
    for (int j = 0; j < m; ++j) ell[j] = rng.uniform(-5.0, 0.0);
    const SimplexWeights prior = random_simplex(rng, m);
    int best = 0;
    for (int j = 1; j < m; ++j) {
      if (ell[j] > ell[best]) best = j;
    }
    const double at_vertex =
        elbo(SimplexWeights::one_hot(m, best), ell, prior, 0.0);
    CHECK(at_vertex == doctest::Approx(ell.maxCoeff()).epsilon(1e-12));
    // Every other point of the simplex scores no higher.
    for (int probe = 0; probe < 10; ++probe) {
      CHECK(elbo(random_simplex(rng, m), ell, prior, 0.0) <= at_vertex + 1e-12);
    }
  }
}

TEST_CASE("kl term is nonnegative with equality at the prior") {
  Rng rng(6);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 1 + rng.uniform_int(6);
    const SimplexWeights q = random_simplex(rng, m);
    const SimplexWeights p = random_simplex(rng, m);
    CHECK(kl_divergence(q, p) >= -1e-12);
  }
  const SimplexWeights p = random_simplex(rng, 4);
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("elbo is concave in q") {
  Rng rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const int m = 2 + rng.uniform_int(5);
    Eigen::VectorXd ell(m);
    for (int j = 0; j < m; ++j) ell[j] = rng.uniform(-6.0, 0.0);
    const SimplexWeights prior = random_simplex(rng, m);
    const SimplexWeights qa = random_simplex(rng, m);
    const SimplexWeights qb = random_simplex(rng, m);
    const double lambda = rng.uniform(0.0, 3.0);
    const SimplexWeights mid(0.5 * (qa.values() + qb.values()));
    const double midpoint = elbo(mid, ell, prior, lambda);
    const double chord = 0.5 * (elbo(qa, ell, prior, lambda) +
                                elbo(qb, ell, prior, lambda));
    CHECK(midpoint >= chord - 1e-12);
  }
}

TEST_CASE("training a single-model gate is a no-op") {
  const auto problem = make_problem(16, 2, 1, 11);
  PosteriorNet net(2, 1, {8, 4}, 11);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 4;
  train_gate(net, problem.features, problem.loglik, &problem.priors,
             GateObjective::elbo, cfg);
  Eigen::VectorXd x(2);
  x << 0.5, -0.5;
  CHECK(net.forward(x)[0] == 1.0);
}

TEST_CASE("training concentrates on a uniformly better model") {
  // Model 0 is better by a full nat on every row; uniform prior.
  const int n = 1000;
  Rng rng(12);
  Eigen::MatrixXd features(n, 2);
  Eigen::MatrixXd loglik(n, 2);
  std::vector<SimplexWeights> priors;
  for (int i = 0; i < n; ++i) {
    features(i, 0) = rng.gaussian();
    features(i, 1) = rng.gaussian();
    const double base = rng.uniform(-2.0, -1.0);
    loglik(i, 0) = base;
    loglik(i, 1) = base - 1.5;
    priors.push_back(SimplexWeights::uniform(2));
  }
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 10;
  cfg.lambda_kl = 0.05;
  cfg.seed = 5;
  PosteriorNet net(2, 2, {64, 32, 16}, 5);
  train_gate(net, features, loglik, &priors, GateObjective::elbo, cfg);

  // Full-batch run (Algorithm-1 mode) as the oracle companion; both must
  // approach the lambda->0 analytic optimum, one-hot on model 0.
  TrainConfig full = cfg;
  full.batch_size = n;
  full.epochs = 200;
  PosteriorNet oracle_net(2, 2, {64, 32, 16}, 5);
  train_gate(oracle_net, features, loglik, &priors, GateObjective::elbo, full);

  double mean_trained = 0.0, mean_oracle = 0.0;
  for (int i = 0; i < n; ++i) {
    mean_trained += net.forward(features.row(i).transpose())[0];
    mean_oracle += oracle_net.forward(features.row(i).transpose())[0];
  }
  mean_trained /= n;
  mean_oracle /= n;
  CHECK(mean_trained > 0.9);
  CHECK(mean_oracle > 0.9);
}

TEST_CASE("a huge kl weight pins the posterior to a uniform prior") {
  const int n = 200;
  auto problem = make_problem(n, 2, 3, 13);
  for (auto& p : problem.priors) p = SimplexWeights::uniform(3);
  TrainConfig cfg;
  cfg.lambda_kl = 1e6;
  cfg.epochs = 10;
  cfg.seed = 3;
  PosteriorNet net(2, 3, {16, 8}, 3);
  train_gate(net, problem.features, problem.loglik, &problem.priors,
             GateObjective::elbo, cfg);
  for (int i = 0; i < 20; ++i) {
    const SimplexWeights w = net.forward(problem.features.row(i).transpose());
    for (int j = 0; j < 3; ++j) CHECK(std::abs(w[j] - 1.0 / 3) < 0.01);
  }
}

TEST_CASE("training rejects misaligned inputs and non-finite losses") {
  const auto problem = make_problem(8, 2, 3, 14);
  PosteriorNet net(2, 3, {8}, 14);
  TrainConfig cfg;

  auto short_priors = problem.priors;
  short_priors.pop_back();
  CHECK_THROWS_AS(train_gate(net, problem.features, problem.loglik, &short_priors,
                             GateObjective::elbo, cfg),
                  std::invalid_argument);

  Eigen::MatrixXd bad = problem.loglik;
  bad(3, 1) = -std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(train_gate(net, problem.features, bad, &problem.priors,
                             GateObjective::elbo, cfg),
                  TrainError);

  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(train_gate(net, problem.features, problem.loglik,
                             &problem.priors, GateObjective::elbo, cfg),
                  std::invalid_argument);
}

TEST_CASE("per-epoch mean elbo improves on simulation data") {
  SimulationConfig sim;
  sim.n_train = 400;
  sim.n_test = 10;
  sim.seed = 15;
  const auto [train_data, test_data] = simulate_two_region(sim);
  std::vector<BasePredictor> models = {
      fit_poly_logreg(train_data, 2), fit_lda(train_data),
      BasePredictor::soft_circle({0.8, 0.0}, 1.0, 5.0)};
  const auto table = loglik_table(models, train_data);
  const auto cache = EnergyCache::discrete(models, train_data.features, 2);
  std::vector<SimplexWeights> priors;
  for (int i = 0; i < train_data.rows(); ++i) {
    priors.push_back(training_prior(cache, i));
  }
  PosteriorNet net(2, 3, {64, 32, 16}, 16);
  TrainConfig cfg;
  cfg.seed = 16;
  const TrainResult result = train(net, train_data, table, priors, cfg);
  REQUIRE(result.trace.size() == 10);
  CHECK(result.trace.back().mean_objective >=
        result.trace.front().mean_objective - 1e-6);
}

TEST_CASE("gradient check against central differences") {
  const auto problem = make_problem(6, 3, 4, 17);
  const PosteriorNet net(3, 4, {8, 6}, 17);
  CHECK(net.parameter_count() <= 1000);

  SUBCASE("elbo objective") {
    const double err = grad_check(net, problem.features, problem.loglik,
                                  &problem.priors, GateObjective::elbo, 0.05);
    CHECK(err < 1e-4);
  }
  SUBCASE("lambda zero reduces to the expected-loglik gradient") {
    const double err = grad_check(net, problem.features, problem.loglik,
                                  &problem.priors, GateObjective::elbo, 0.0);
    CHECK(err < 1e-4);
  }
  SUBCASE("mixture objective") {
    const double err = grad_check(net, problem.features, problem.loglik,
                                  nullptr, GateObjective::mixture_loglik, 0.0);
    CHECK(err < 1e-4);
  }
  SUBCASE("zero-gradient instance reports zero error") {
    // A single-model gate has a constant objective in theta.
    const auto one = make_problem(4, 2, 1, 18);
    const PosteriorNet tiny(2, 1, {4}, 18);
    CHECK(grad_check(tiny, one.features, one.loglik, &one.priors,
                     GateObjective::elbo, 0.05) == 0.0);
  }
}

TEST_CASE("assign_weights is forward and satisfies the mixture bound") {
  const auto problem = make_problem(12, 2, 3, 19);
  PosteriorNet net(2, 3, {16, 8}, 19);
  TrainConfig cfg;
  cfg.epochs = 3;
  train_gate(net, problem.features, problem.loglik, &problem.priors,
             GateObjective::elbo, cfg);
  for (int i = 0; i < 12; ++i) {
    const Eigen::VectorXd x = problem.features.row(i).transpose();
    const SimplexWeights a = assign_weights(net, x);
    const SimplexWeights f = net.forward(x);
    CHECK(a.values() == f.values());
    const double mix = mixture_loglik(a, problem.loglik.row(i).transpose());
    for (int k = 0; k < 3; ++k) {
      if (a[k] == 0.0) continue;
      CHECK(mix >= std::log(a[k]) + problem.loglik(i, k) - 1e-9);
    }
  }
}

TEST_CASE("permuting the model order permutes the trained weights") {
  const int n = 64;
  Rng rng(20);
  Eigen::MatrixXd features(n, 2);
  Eigen::MatrixXd loglik(n, 2);
  std::vector<SimplexWeights> priors;
  for (int i = 0; i < n; ++i) {
    features(i, 0) = rng.gaussian();
    features(i, 1) = rng.gaussian();
    loglik(i, 0) = rng.uniform(-3.0, 0.0);
    loglik(i, 1) = rng.uniform(-3.0, 0.0);
    priors.push_back(random_simplex(rng, 2));
  }
  Eigen::MatrixXd swapped = loglik;
  swapped.col(0).swap(swapped.col(1));
  std::vector<SimplexWeights> swapped_priors;
  for (const auto& p : priors) {
    swapped_priors.push_back(SimplexWeights(vec({p[1], p[0]})));
  }

  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 21;
  PosteriorNet net_a(2, 2, {16, 8}, 21);
  PosteriorNet net_b(2, 2, {16, 8}, 21);
  train_gate(net_a, features, loglik, &priors, GateObjective::elbo, cfg);
  train_gate(net_b, features, swapped, &swapped_priors, GateObjective::elbo, cfg);

  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = features.row(i).transpose();
    const SimplexWeights wa = net_a.forward(x);
    const SimplexWeights wb = net_b.forward(x);
    CHECK(wa[0] == doctest::Approx(wb[1]).epsilon(1e-9));
    CHECK(wa[1] == doctest::Approx(wb[0]).epsilon(1e-9));
  }
}

TEST_CASE("net serialization round trip is exact") {
  const auto problem = make_problem(10, 3, 4, 22);
  PosteriorNet net(3, 4, {8, 6}, 22);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lambda_kl = 0.2;
  train_gate(net, problem.features, problem.loglik, &problem.priors,
             GateObjective::elbo, cfg);

  const PosteriorNet restored = PosteriorNet::from_json(net.to_json());
  Eigen::VectorXd x(3);
  x << 0.1, -0.4, 1.7;
  CHECK(restored.log_forward(x) == net.log_forward(x));
  CHECK(restored.dims() == net.dims());
  CHECK(restored.to_json().at("config").at("lambda_kl") == 0.2);
}
