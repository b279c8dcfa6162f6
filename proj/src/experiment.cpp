#include "iabma/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace iabma {

namespace {

const std::set<std::string> kKnownMethods = {
    "iabma", "best_single", "uniform", "accuracy", "bma", "moe", "dla"};

std::vector<SimplexWeights> constant_rows(const SimplexWeights& w, int n) {
  return std::vector<SimplexWeights>(static_cast<std::size_t>(n), w);
}

std::string timestamp_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << text;
}

void write_trace_csv(const std::filesystem::path& path,
                     const std::vector<EpochStats>& trace) {
  std::ostringstream out;
  out << "epoch,mean_elbo,mean_kl,mean_loglik\n";
  for (std::size_t e = 0; e < trace.size(); ++e) {
    out << (e + 1) << ',' << format_csv_double(trace[e].mean_objective) << ','
        << format_csv_double(trace[e].mean_kl) << ','
        << format_csv_double(trace[e].mean_loglik) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<std::string> metric_names(Task task) {
  if (task == Task::classification) return {"accuracy", "ece", "mean_loglik"};
  return {"rmse", "r2", "mean_loglik"};
}

double metric_value(const MetricReport& report, const std::string& metric) {
  if (metric == "accuracy") return report.accuracy;
  if (metric == "ece") return report.ece;
  if (metric == "rmse") return report.rmse;
  if (metric == "r2") return report.r2;
  if (metric == "mean_loglik") return report.mean_loglik;
  throw std::invalid_argument("unknown metric " + metric);
}

}  // namespace

std::string format_csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BasePredictor PredictorSpec::fit(const Dataset& train) const {
  switch (kind) {
    case PredictorKind::poly_logreg:
      return BasePredictor::fit_poly_logreg(train, degree);
    case PredictorKind::lda:
      return BasePredictor::fit_lda(train);
    case PredictorKind::soft_circle:
      return BasePredictor::soft_circle(center, radius, gamma);
    case PredictorKind::ridge:
      return BasePredictor::fit_ridge(train, alpha);
    case PredictorKind::knn_reg:
      return BasePredictor::fit_knn_reg(train, k);
  }
  throw std::logic_error("unreachable");
}

nlohmann::json PredictorSpec::to_json() const {
  nlohmann::json j;
  j["kind"] = iabma::to_string(kind);
  switch (kind) {
    case PredictorKind::poly_logreg:
      j["degree"] = degree;
      break;
    case PredictorKind::lda:
      break;
    case PredictorKind::soft_circle:
      j["center"] = {center[0], center[1]};
      j["radius"] = radius;
      j["gamma"] = gamma;
      break;
    case PredictorKind::ridge:
      j["alpha"] = alpha;
      break;
    case PredictorKind::knn_reg:
      j["k"] = k;
      break;
  }
  return j;
}

PredictorSpec PredictorSpec::from_json(const nlohmann::json& j) {
  PredictorSpec spec;
  const std::string kind = j.at("kind");
  if (kind == "poly_logreg") {
    spec.kind = PredictorKind::poly_logreg;
    spec.degree = j.value("degree", 2);
  } else if (kind == "lda") {
    spec.kind = PredictorKind::lda;
  } else if (kind == "soft_circle") {
    spec.kind = PredictorKind::soft_circle;
    if (j.contains("center")) {
      spec.center = Eigen::Vector2d(j["center"][0], j["center"][1]);
    }
    spec.radius = j.value("radius", 1.0);
    spec.gamma = j.value("gamma", 5.0);
  } else if (kind == "ridge") {
    spec.kind = PredictorKind::ridge;
    spec.alpha = j.value("alpha", 0.05);
  } else if (kind == "knn_reg") {
    spec.kind = PredictorKind::knn_reg;
    spec.k = j.value("k", 3);
  } else {
    throw std::invalid_argument("unknown predictor kind: " + kind);
  }
  return spec;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) {
    throw std::invalid_argument("config: repetitions must be >= 1");
  }
  if (methods.empty()) {
    throw std::invalid_argument("config: method list must be nonempty");
  }
  for (const auto& method : methods) {
    if (!kKnownMethods.count(method)) {
      throw std::invalid_argument("config: unknown method '" + method + "'");
    }
  }
  iabma.validate();
  moe.validate();
  dla.validate();
  if (mc_samples < 1) {
    throw std::invalid_argument("config: mc_samples must be >= 1");
  }
  if (metric_bins < 1) {
    throw std::invalid_argument("config: metric_bins must be >= 1");
  }
  if (source == DataSource::simulate) {
    simulation.validate();
  } else {
    if (schema.label_col.empty()) {
      throw std::invalid_argument("config: csv source needs label_col");
    }
    if (split_options.test_fraction <= 0.0 || split_options.test_fraction >= 1.0) {
      throw std::invalid_argument("config: test_fraction must be in (0, 1)");
    }
  }
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["source"] = source == DataSource::simulate ? "simulate" : "csv";
  j["simulation"] = {{"n_train", simulation.n_train},
                     {"n_test", simulation.n_test},
                     {"offset", simulation.offset},
                     {"cov_scale", simulation.cov_scale}};
  if (source == DataSource::csv) {
    j["csv"] = {{"path", csv_path.string()},
                {"label_col", schema.label_col},
                {"task", iabma::to_string(schema.task)},
                {"feature_cols", schema.feature_cols},
                {"test_fraction", split_options.test_fraction},
                {"stratify", split_options.stratify},
                {"bins", split_options.bins},
                {"balance_train", split_options.balance_train},
                {"standardize", standardize}};
  }
  nlohmann::json roster_json = nlohmann::json::array();
  for (const auto& spec : roster) roster_json.push_back(spec.to_json());
  j["predictors"] = std::move(roster_json);
  j["methods"] = methods;
  j["iabma"] = {{"learning_rate", iabma.learning_rate},
                {"batch_size", iabma.batch_size},
                {"epochs", iabma.epochs},
                {"lambda_kl", iabma.lambda_kl}};
  j["moe"] = {{"learning_rate", moe.learning_rate},
              {"batch_size", moe.batch_size},
              {"epochs", moe.epochs}};
  j["dla"] = {{"k", dla.k},
              {"temperature", dla.temperature},
              {"smoothing", dla.smoothing}};
  j["mc_samples"] = mc_samples;
  j["metric_bins"] = metric_bins;
  j["repetitions"] = repetitions;
  j["seed"] = master_seed;
  j["out"] = out_dir.string();
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig config;
  const std::string source = j.value("source", "simulate");
  if (source == "simulate") {
    config.source = DataSource::simulate;
  } else if (source == "csv") {
    config.source = DataSource::csv;
  } else {
    throw std::invalid_argument("config: unknown source '" + source + "'");
  }
  if (j.contains("simulation")) {
    const auto& s = j["simulation"];
    config.simulation.n_train = s.value("n_train", 1000);
    config.simulation.n_test = s.value("n_test", 500);
    config.simulation.offset = s.value("offset", 1.0);
    config.simulation.cov_scale = s.value("cov_scale", 0.1);
  }
  if (j.contains("csv")) {
    const auto& c = j["csv"];
    config.csv_path = c.value("path", std::string{});
    config.schema.label_col = c.value("label_col", std::string{});
    config.schema.task = task_from_string(c.value("task", "regression"));
    config.schema.feature_cols =
        c.value("feature_cols", std::vector<std::string>{});
    config.split_options.test_fraction = c.value("test_fraction", 0.2);
    config.split_options.stratify = c.value("stratify", true);
    config.split_options.bins = c.value("bins", 12);
    config.split_options.balance_train = c.value("balance_train", false);
    config.standardize = c.value("standardize", true);
  }
  if (j.contains("predictors")) {
    for (const auto& item : j["predictors"]) {
      config.roster.push_back(PredictorSpec::from_json(item));
    }
  }
  if (j.contains("methods")) {
    config.methods = j["methods"].get<std::vector<std::string>>();
  }
  if (j.contains("iabma")) {
    const auto& c = j["iabma"];
    config.iabma.learning_rate = c.value("learning_rate", 1e-3);
    config.iabma.batch_size = c.value("batch_size", 64);
    config.iabma.epochs = c.value("epochs", 10);
    config.iabma.lambda_kl = c.value("lambda_kl", 0.05);
  }
  if (j.contains("moe")) {
    const auto& c = j["moe"];
    config.moe.learning_rate = c.value("learning_rate", 1e-3);
    config.moe.batch_size = c.value("batch_size", 64);
    config.moe.epochs = c.value("epochs", 10);
  }
  if (j.contains("dla")) {
    const auto& c = j["dla"];
    config.dla.k = c.value("k", 50);
    config.dla.temperature = c.value("temperature", 1.0);
    config.dla.smoothing = c.value("smoothing", 1.0);
  }
  config.mc_samples = j.value("mc_samples", 64);
  config.metric_bins = j.value("metric_bins", 10);
  config.repetitions = j.value("repetitions", 10);
  config.master_seed = j.value("seed", static_cast<std::uint64_t>(0));
  config.out_dir = j.value("out", std::string{"out"});
  return config;
}

namespace {

// Z-score features (and the regression target) by training statistics.
void standardize_in_place(Dataset& train, Dataset& test) {
  const Eigen::RowVectorXd mean = train.features.colwise().mean();
  Eigen::RowVectorXd scale(train.dims());
  for (int c = 0; c < train.dims(); ++c) {
    const double sd =
        std::sqrt((train.features.col(c).array() - mean[c]).square().mean());
    scale[c] = sd > 0.0 ? sd : 1.0;
  }
  for (auto* data : {&train, &test}) {
    data->features = (data->features.rowwise() - mean).array().rowwise() /
                     scale.array();
  }
  if (train.task == Task::regression) {
    const double y_mean = train.labels.mean();
    double y_sd =
        std::sqrt((train.labels.array() - y_mean).square().mean());
    if (y_sd <= 0.0) y_sd = 1.0;
    train.labels = (train.labels.array() - y_mean) / y_sd;
    test.labels = (test.labels.array() - y_mean) / y_sd;
  }
}

std::vector<PredictorSpec> default_roster(const ExperimentConfig& config,
                                          Task task) {
  std::vector<PredictorSpec> roster;
  if (task == Task::classification) {
    if (config.source == DataSource::simulate) {
      const double t = config.simulation.offset;
      PredictorSpec poly2{.kind = PredictorKind::poly_logreg, .degree = 2};
      PredictorSpec poly3{.kind = PredictorKind::poly_logreg, .degree = 3};
      PredictorSpec lda{.kind = PredictorKind::lda};
      PredictorSpec circle1{.kind = PredictorKind::soft_circle,
                            .center = Eigen::Vector2d(0.8 * t, 0.0),
                            .radius = 1.0,
                            .gamma = 5.0};
      PredictorSpec circle2 = circle1;
      circle2.gamma = 4.0;
      roster = {poly2, poly3, lda, circle1, circle2};
    } else {
      roster = {PredictorSpec{.kind = PredictorKind::poly_logreg, .degree = 1},
                PredictorSpec{.kind = PredictorKind::poly_logreg, .degree = 2},
                PredictorSpec{.kind = PredictorKind::lda}};
    }
  } else {
    PredictorSpec ridge_small{.kind = PredictorKind::ridge, .alpha = 0.05};
    PredictorSpec ridge_large{.kind = PredictorKind::ridge, .alpha = 10.0};
    PredictorSpec knn3{.kind = PredictorKind::knn_reg, .k = 3};
    PredictorSpec knn10{.kind = PredictorKind::knn_reg, .k = 10};
    roster = {ridge_small, ridge_large, knn3, knn10};
  }
  return roster;
}

}  // namespace

RepetitionArtifacts run_repetition(const ExperimentConfig& config, int repetition,
                                   const std::optional<Dataset>& csv_data) {
  const std::uint64_t rep_seed =
      derive_seed(config.master_seed, static_cast<std::uint64_t>(repetition));
  RepetitionArtifacts artifacts;

  if (config.source == DataSource::simulate) {
    SimulationConfig sim = config.simulation;
    sim.seed = rep_seed;
    auto [train, test] = simulate_two_region(sim);
    artifacts.train = std::move(train);
    artifacts.test = std::move(test);
  } else {
    SplitOptions options = config.split_options;
    options.seed = derive_seed(rep_seed, 3);
    SplitResult result = split(*csv_data, options);
    artifacts.train = std::move(result.train);
    artifacts.test = std::move(result.test);
    if (config.standardize) standardize_in_place(artifacts.train, artifacts.test);
  }

  const auto roster = config.roster.empty()
                          ? default_roster(config, artifacts.train.task)
                          : config.roster;
  for (const auto& spec : roster) {
    artifacts.predictors.push_back(spec.fit(artifacts.train));
  }
  const int m = static_cast<int>(artifacts.predictors.size());

  artifacts.train_table = loglik_table(artifacts.predictors, artifacts.train);
  artifacts.test_table = loglik_table(artifacts.predictors, artifacts.test);

  const bool needs_prior =
      std::find(config.methods.begin(), config.methods.end(), "iabma") !=
      config.methods.end();
  if (needs_prior) {
    EnergyCache cache = [&] {
      if (artifacts.train.task == Task::classification) {
        return EnergyCache::discrete(artifacts.predictors,
                                     artifacts.train.features,
                                     artifacts.train.num_classes);
      }
      const double y_min = artifacts.train.labels.minCoeff();
      const double y_max = artifacts.train.labels.maxCoeff();
      const double sd = std::sqrt(
          (artifacts.train.labels.array() - artifacts.train.labels.mean())
              .square()
              .mean());
      McConfig mc;
      mc.num_samples = config.mc_samples;
      mc.y_min = y_min - sd;
      mc.y_max = y_max + sd;
      mc.seed = derive_seed(rep_seed, 4);
      return EnergyCache::continuous(artifacts.predictors,
                                     artifacts.train.features, mc);
    }();
    artifacts.priors.reserve(static_cast<std::size_t>(artifacts.train.rows()));
    for (int i = 0; i < artifacts.train.rows(); ++i) {
      artifacts.priors.push_back(training_prior(cache, i));
    }
  }

  const int n_test = artifacts.test.rows();
  for (const auto& method : config.methods) {
    std::vector<SimplexWeights> weights;
    if (method == "iabma") {
      TrainConfig cfg = config.iabma;
      cfg.seed = derive_seed(rep_seed, 5);
      PosteriorNet net(artifacts.train.dims(), m, {64, 32, 16}, cfg.seed);
      TrainResult result =
          train(net, artifacts.train, artifacts.train_table, artifacts.priors, cfg);
      artifacts.iabma_trace = result.trace;
      weights.reserve(static_cast<std::size_t>(n_test));
      for (int i = 0; i < n_test; ++i) {
        weights.push_back(
            assign_weights(net, artifacts.test.features.row(i).transpose()));
      }
      artifacts.posterior_net = std::move(net);
    } else if (method == "best_single") {
      weights = constant_rows(weights_best_single(artifacts.train_table), n_test);
    } else if (method == "uniform") {
      weights = constant_rows(weights_uniform(m), n_test);
    } else if (method == "accuracy") {
      weights = constant_rows(
          weights_accuracy(artifacts.train_table, artifacts.train,
                           artifacts.predictors),
          n_test);
    } else if (method == "bma") {
      weights = constant_rows(weights_bma(artifacts.train_table), n_test);
    } else if (method == "moe") {
      TrainConfig cfg = config.moe;
      cfg.seed = derive_seed(rep_seed, 6);
      PosteriorNet gate(artifacts.train.dims(), m, {64, 32, 16}, cfg.seed);
      TrainResult result =
          train_gate(gate, artifacts.train.features, artifacts.train_table.loglik,
                     nullptr, GateObjective::mixture_loglik, cfg);
      artifacts.moe_trace = result.trace;
      weights.reserve(static_cast<std::size_t>(n_test));
      for (int i = 0; i < n_test; ++i) {
        weights.push_back(
            gate.forward(artifacts.test.features.row(i).transpose()));
      }
      artifacts.moe_net = std::move(gate);
    } else if (method == "dla") {
      weights.reserve(static_cast<std::size_t>(n_test));
      for (int i = 0; i < n_test; ++i) {
        weights.push_back(weights_dla(
            artifacts.train, artifacts.train_table, artifacts.predictors,
            artifacts.test.features.row(i).transpose(), config.dla.k,
            config.dla.temperature, config.dla.smoothing));
      }
    } else {
      throw std::invalid_argument("unknown method '" + method + "'");
    }
    artifacts.method_predictions[method] =
        mixture_predict(artifacts.predictors, artifacts.test, weights);
    artifacts.method_weights[method] = std::move(weights);
  }
  return artifacts;
}

void write_weights_csv(const std::filesystem::path& path,
                       const std::vector<SimplexWeights>& weights,
                       const std::vector<std::string>& model_names) {
  std::ostringstream out;
  for (std::size_t j = 0; j < model_names.size(); ++j) {
    out << (j ? "," : "") << model_names[j];
  }
  out << '\n';
  for (const auto& w : weights) {
    for (int j = 0; j < w.size(); ++j) {
      out << (j ? "," : "") << format_csv_double(w[j]);
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

namespace {

std::vector<std::vector<double>> read_matrix_csv(
    const std::filesystem::path& path, std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty file " + path.string());
  }
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != header.size()) {
      throw std::runtime_error("ragged row in " + path.string());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path.string());
  return rows;
}

}  // namespace

std::vector<SimplexWeights> read_weights_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_matrix_csv(path, header);
  std::vector<SimplexWeights> weights;
  weights.reserve(rows.size());
  for (const auto& row : rows) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(row.size()));
    for (std::size_t j = 0; j < row.size(); ++j) {
      w[static_cast<Eigen::Index>(j)] = row[j];
    }
    weights.emplace_back(std::move(w));
  }
  return weights;
}

void write_table_csv(const std::filesystem::path& path,
                     const LikelihoodTable& table) {
  std::ostringstream out;
  for (std::size_t j = 0; j < table.model_names.size(); ++j) {
    out << (j ? "," : "") << table.model_names[j];
  }
  out << '\n';
  for (int i = 0; i < table.rows(); ++i) {
    for (int j = 0; j < table.models(); ++j) {
      out << (j ? "," : "") << format_csv_double(table.loglik(i, j));
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

LikelihoodTable read_table_csv(const std::filesystem::path& path, Task task) {
  std::vector<std::string> header;
  const auto rows = read_matrix_csv(path, header);
  Eigen::MatrixXd loglik(static_cast<Eigen::Index>(rows.size()),
                         static_cast<Eigen::Index>(header.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      loglik(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return LikelihoodTable::make(std::move(loglik), header, task);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::optional<Dataset> csv_data;
  if (config.source == DataSource::csv) {
    csv_data = load_csv(config.csv_path, config.schema);
  }

  std::filesystem::create_directories(config.out_dir);
  ExperimentResult result;
  Task task = Task::classification;

  for (int r = 1; r <= config.repetitions; ++r) {
    RepetitionResult rep;
    rep.repetition = r;
    const auto rep_dir = config.out_dir / ("rep_" + std::to_string(r));
    try {
      RepetitionArtifacts artifacts = run_repetition(config, r, csv_data);
      task = artifacts.test.task;
      std::filesystem::create_directories(rep_dir);

      std::ofstream(rep_dir / "predictors.json")
          << predictors_to_json(artifacts.predictors).dump(2) << '\n';
      if (artifacts.posterior_net) {
        std::ofstream(rep_dir / "posterior_net.json")
            << artifacts.posterior_net->to_json().dump(2) << '\n';
        write_trace_csv(rep_dir / "trace_iabma.csv", artifacts.iabma_trace);
      }
      if (artifacts.moe_net) {
        std::ofstream(rep_dir / "moe_net.json")
            << artifacts.moe_net->to_json().dump(2) << '\n';
        write_trace_csv(rep_dir / "trace_moe.csv", artifacts.moe_trace);
      }
      write_table_csv(rep_dir / "test_table.csv", artifacts.test_table);

      std::ostringstream metrics_csv;
      metrics_csv << MetricReport::csv_header() << '\n';
      for (const auto& method : config.methods) {
        const auto& prediction = artifacts.method_predictions.at(method);
        MetricReport report =
            evaluate(prediction, artifacts.test, config.metric_bins, method, r);
        rep.theorem[method] = theorem1_check(
            artifacts.method_weights.at(method), artifacts.test_table);
        write_weights_csv(rep_dir / ("weights_" + method + ".csv"),
                          artifacts.method_weights.at(method),
                          artifacts.test_table.model_names);
        std::ofstream(rep_dir / ("metrics_" + method + ".json"))
            << report.to_json().dump(2) << '\n';
        metrics_csv << report.csv_row() << '\n';
        rep.reports[method] = std::move(report);
      }
      write_text_file(rep_dir / "metrics.csv", metrics_csv.str());
      rep.iabma_trace = artifacts.iabma_trace;
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = e.what();
      ++result.failed;
    }
    result.repetitions.push_back(std::move(rep));
  }

  // Aggregate over successful repetitions.
  const auto names = metric_names(task);
  std::ostringstream agg_csv;
  std::ostringstream agg_txt;
  agg_csv << "method,metric,mean,sd\n";
  agg_txt << "method x metric, mean (sd) over " << config.repetitions
          << " repetition(s)\n";
  for (const auto& method : config.methods) {
    for (const auto& metric : names) {
      std::vector<double> values;
      for (const auto& rep : result.repetitions) {
        if (!rep.ok) continue;
        values.push_back(metric_value(rep.reports.at(method), metric));
      }
      if (values.empty()) continue;
      double mean = 0.0;
      for (const double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double sd = 0.0;
      if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) ss += (v - mean) * (v - mean);
        sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
      }
      result.aggregate.push_back({method, metric, mean, sd});
      agg_csv << method << ',' << metric << ',' << format_csv_double(mean) << ','
              << format_csv_double(sd) << '\n';
      char line[128];
      std::snprintf(line, sizeof(line), "%-12s %-12s %10.4f (%.4f)\n",
                    method.c_str(), metric.c_str(), mean, sd);
      agg_txt << line;
    }
  }
  write_text_file(config.out_dir / "aggregate.csv", agg_csv.str());
  write_text_file(config.out_dir / "aggregate.txt", agg_txt.str());

  nlohmann::json manifest;
  manifest["config"] = config.to_json();
  manifest["created"] = timestamp_now();
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& rep : result.repetitions) {
    nlohmann::json rj;
    rj["repetition"] = rep.repetition;
    rj["status"] = rep.ok ? "ok" : "failed";
    if (!rep.ok) rj["error"] = rep.error;
    nlohmann::json violations;
    for (const auto& [method, report] : rep.theorem) {
      violations[method] = report.max_violation;
    }
    rj["theorem_max_violation"] = std::move(violations);
    reps.push_back(std::move(rj));
  }
  manifest["repetitions"] = std::move(reps);
  std::ofstream(config.out_dir / "manifest.json") << manifest.dump(2) << '\n';
  return result;
}

}  // namespace iabma
