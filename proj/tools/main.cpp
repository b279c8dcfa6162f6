#include "iabma/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitTheoremViolation = 3;

std::string format_flag_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

int cmd_simulate(const iabma::SimulationConfig& cfg,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto [train, test] = iabma::simulate_two_region(cfg);
  iabma::write_csv(out_dir / "train.csv", train, {"x1", "x2"});
  iabma::write_csv(out_dir / "test.csv", test, {"x1", "x2"});
  nlohmann::json manifest;
  manifest["command"] = "simulate";
  manifest["seed"] = cfg.seed;
  manifest["n_train"] = cfg.n_train;
  manifest["n_test"] = cfg.n_test;
  manifest["offset"] = cfg.offset;
  manifest["cov_scale"] = cfg.cov_scale;
  manifest["columns"] = {"x1", "x2", "label", "region"};
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << '\n';
  std::cout << "wrote " << (out_dir / "train.csv").string() << " ("
            << train.rows() << " rows) and " << (out_dir / "test.csv").string()
            << " (" << test.rows() << " rows)\n";
  return kExitOk;
}

int cmd_run(const iabma::ExperimentConfig& config) {
  const iabma::ExperimentResult result = iabma::run_experiment(config);
  for (const auto& rep : result.repetitions) {
    if (rep.ok) {
      std::cout << "rep " << rep.repetition << ": ok\n";
    } else {
      std::cerr << "rep " << rep.repetition << ": FAILED: " << rep.error << '\n';
    }
  }
  std::cout << "aggregate written to "
            << (config.out_dir / "aggregate.csv").string() << '\n';
  if (result.failed == static_cast<int>(result.repetitions.size())) {
    std::cerr << "all repetitions failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_prior_demo(const std::vector<double>& beta1s,
                   const std::vector<double>& beta2s,
                   const std::vector<double>& baselines, double x_min,
                   double x_max, int steps,
                   const std::filesystem::path& out_dir) {
  if (steps < 1) throw std::invalid_argument("prior-demo: steps must be >= 1");
  if (steps > 1 && !(x_min < x_max)) {
    throw std::invalid_argument("prior-demo: needs x-min < x-max");
  }
  std::filesystem::create_directories(out_dir);
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
        steps == 1 ? x_min : x_min + (x_max - x_min) * i / (steps - 1);
  }
  for (const double beta1 : beta1s) {
    for (const double beta2 : beta2s) {
      for (const double baseline : baselines) {
        const auto table = iabma::bernoulli_demo(beta1, beta2, baseline, grid);
        const std::string name = "prior_demo_b1_" + format_flag_value(beta1) +
                                 "_b2_" + format_flag_value(beta2) + "_c_" +
                                 format_flag_value(baseline) + ".csv";
        std::ofstream out(out_dir / name);
        out << "x,p_j1\n";
        for (const auto& [x, p] : table) {
          out << iabma::format_csv_double(x) << ','
              << iabma::format_csv_double(p) << '\n';
        }
        std::cout << "wrote " << (out_dir / name).string() << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_theorem_check(const std::filesystem::path& weights_path,
                      const std::filesystem::path& table_path,
                      iabma::Task task) {
  const auto weights = iabma::read_weights_csv(weights_path);
  const auto table = iabma::read_table_csv(table_path, task);
  const auto report = iabma::theorem1_check(weights, table);
  std::cout << "rows checked:          " << table.rows() << '\n'
            << "max violation:         "
            << iabma::format_csv_double(report.max_violation) << '\n'
            << "aggregate slack:       "
            << iabma::format_csv_double(report.aggregate_slack) << '\n'
            << "mean mixture loglik:   "
            << iabma::format_csv_double(report.mean_mixture_loglik) << '\n'
            << "mean selected loglik:  "
            << iabma::format_csv_double(report.mean_selected_loglik) << '\n'
            << "mean selected log w:   "
            << iabma::format_csv_double(report.mean_selected_log_weight) << '\n';
  if (report.max_violation > 1e-9) {
    std::cerr << "pointwise inequality violated\n";
    return kExitTheoremViolation;
  }
  std::cout << "pointwise inequality holds\n";
  return kExitOk;
}

int cmd_gradcheck(std::uint64_t seed) {
  // Small seeded instance: 6 rows, 3 features, 4 models, ~100 parameters.
  iabma::Rng rng(seed);
  const int n = 6, d = 3, m = 4;
  Eigen::MatrixXd features(n, d);
  Eigen::MatrixXd loglik(n, m);
  std::vector<iabma::SimplexWeights> priors;
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) features(i, c) = rng.gaussian();
    for (int j = 0; j < m; ++j) loglik(i, j) = rng.uniform(-3.0, 0.0);
    Eigen::VectorXd energies(m);
    for (int j = 0; j < m; ++j) energies[j] = rng.gaussian();
    priors.push_back(iabma::softmax(energies));
  }
  iabma::PosteriorNet net(d, m, {8, 6}, seed);

  const double elbo_error =
      iabma::grad_check(net, features, loglik, &priors,
                        iabma::GateObjective::elbo, 0.05);
  const double moe_error =
      iabma::grad_check(net, features, loglik, nullptr,
                        iabma::GateObjective::mixture_loglik, 0.0);
  std::cout << "elbo objective max relative gradient error: "
            << iabma::format_csv_double(elbo_error) << '\n'
            << "moe objective max relative gradient error:  "
            << iabma::format_csv_double(moe_error) << '\n';
  if (elbo_error >= 1e-4 || moe_error >= 1e-4) {
    std::cerr << "gradient check failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Input-adaptive Bayesian model averaging experiments"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate the two-region dataset");
  iabma::SimulationConfig sim_cfg;
  std::string sim_out = "out";
  simulate->add_option("--n-train", sim_cfg.n_train, "Training rows");
  simulate->add_option("--n-test", sim_cfg.n_test, "Test rows");
  simulate->add_option("--offset", sim_cfg.offset, "Region offset t");
  simulate->add_option("--cov-scale", sim_cfg.cov_scale, "Gaussian covariance scale");
  simulate->add_option("--seed", sim_cfg.seed, "Seed");
  simulate->add_option("--out", sim_out, "Output directory");

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment from a config");
  std::string run_config_path;
  std::string run_out;
  std::uint64_t run_seed = 0;
  int run_reps = 0;
  bool run_seed_set = false, run_out_set = false, run_reps_set = false;
  run->add_option("--config", run_config_path, "Experiment config JSON");
  run->add_option("--out", run_out, "Output directory (overrides config)")
      ->each([&](const std::string&) { run_out_set = true; });
  run->add_option("--seed", run_seed, "Master seed (overrides config)")
      ->each([&](const std::string&) { run_seed_set = true; });
  run->add_option("--repetitions", run_reps, "Repetitions (overrides config)")
      ->each([&](const std::string&) { run_reps_set = true; });

  // prior-demo
  auto* demo = app.add_subcommand("prior-demo",
                                  "Two-model Bernoulli adaptive-prior curves");
  std::vector<double> beta1s = {3.0, 5.0, 9.0};
  std::vector<double> beta2s = {1.0};
  std::vector<double> baselines = {std::log(5.0)};
  double x_min = -3.0, x_max = 3.0;
  int steps = 601;
  std::string demo_out = "out";
  demo->add_option("--beta1", beta1s, "Slopes of model 1");
  demo->add_option("--beta2", beta2s, "Slopes of model 2");
  demo->add_option("--baseline-logodds", baselines, "Training baseline log-odds");
  demo->add_option("--x-min", x_min, "Grid start");
  demo->add_option("--x-max", x_max, "Grid end");
  demo->add_option("--steps", steps, "Grid points");
  demo->add_option("--out", demo_out, "Output directory");

  // theorem-check
  auto* check = app.add_subcommand("theorem-check",
                                   "Verify the mixture lower bound on files");
  std::string weights_path, table_path, check_task = "classification";
  check->add_option("--weights", weights_path, "Per-row weights CSV")->required();
  check->add_option("--table", table_path, "Log-likelihood table CSV")->required();
  check->add_option("--task", check_task, "classification or regression");

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of training gradients");
  std::uint64_t gradcheck_seed = 20240601;
  gradcheck->add_option("--seed", gradcheck_seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_cfg, sim_out);
    if (run->parsed()) {
      iabma::ExperimentConfig config;
      if (!run_config_path.empty()) {
        std::ifstream in(run_config_path);
        if (!in) {
          throw std::invalid_argument("cannot open config " + run_config_path);
        }
        nlohmann::json j;
        in >> j;
        config = iabma::ExperimentConfig::from_json(j);
      }
      // Flags take precedence over config keys.
      if (run_out_set) config.out_dir = run_out;
      if (run_seed_set) config.master_seed = run_seed;
      if (run_reps_set) config.repetitions = run_reps;
      return cmd_run(config);
    }
    if (demo->parsed()) {
      return cmd_prior_demo(beta1s, beta2s, baselines, x_min, x_max, steps,
                            demo_out);
    }
    if (check->parsed()) {
      return cmd_theorem_check(weights_path, table_path,
                               iabma::task_from_string(check_task));
    }
    if (gradcheck->parsed()) return cmd_gradcheck(gradcheck_seed);
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
