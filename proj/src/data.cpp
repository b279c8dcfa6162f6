#include "iabma/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

namespace iabma {

namespace {

struct RegionDraw {
  double x1, x2;
  int label;
  int region;
};

// Point order is fixed (all linear, then all circular) so streams replay.
std::vector<RegionDraw> draw_region_points(int n, double t, double cov_scale,
                                           Rng& rng) {
  std::vector<RegionDraw> points;
  points.reserve(static_cast<std::size_t>(n));
  const int n_linear = n / 2;
  const double sd = std::sqrt(cov_scale);
  for (int i = 0; i < n_linear; ++i) {
    const double x1 = -t + sd * rng.gaussian();
    const double x2 = sd * rng.gaussian();
    points.push_back({x1, x2, x1 + x2 > -t ? 1 : 0, 0});
  }
  for (int i = n_linear; i < n; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double u = rng.uniform(0.0, 2.0);
    const double r = std::sqrt(u);
    const double x1 = t + r * std::cos(theta);
    const double x2 = r * std::sin(theta);
    points.push_back({x1, x2, r < 1.0 ? 1 : 0, 1});
  }
  return points;
}

Dataset points_to_dataset(const std::vector<RegionDraw>& points) {
  const int n = static_cast<int>(points.size());
  Eigen::MatrixXd features(n, 2);
  std::vector<int> labels(points.size());
  std::vector<int> tags(points.size());
  for (int i = 0; i < n; ++i) {
    features(i, 0) = points[static_cast<std::size_t>(i)].x1;
    features(i, 1) = points[static_cast<std::size_t>(i)].x2;
    labels[static_cast<std::size_t>(i)] = points[static_cast<std::size_t>(i)].label;
    tags[static_cast<std::size_t>(i)] = points[static_cast<std::size_t>(i)].region;
  }
  return Dataset::make_classification(std::move(features), std::move(labels),
                                      2, std::move(tags));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && std::isfinite(out);
}

// Round-trip exact double formatting.
std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void SimulationConfig::validate() const {
  if (n_train < 2 || n_test < 2) {
    throw std::invalid_argument("SimulationConfig: n_train, n_test must be >= 2");
  }
  if (offset <= 0.0) {
    throw std::invalid_argument("SimulationConfig: offset t must be > 0");
  }
  if (cov_scale <= 0.0) {
    throw std::invalid_argument("SimulationConfig: cov_scale must be > 0");
  }
}

std::pair<Dataset, Dataset> simulate_two_region(const SimulationConfig& cfg) {
  cfg.validate();
  Rng train_rng(derive_seed(cfg.seed, 1));
  Rng test_rng(derive_seed(cfg.seed, 2));
  auto train = draw_region_points(cfg.n_train, cfg.offset, cfg.cov_scale, train_rng);
  auto test = draw_region_points(cfg.n_test, cfg.offset, cfg.cov_scale, test_rng);
  return {points_to_dataset(train), points_to_dataset(test)};
}

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("load_csv: empty file " + path.string());
  }
  std::vector<std::string> header = split_line(line);
  for (auto& h : header) h = trim(h);

  const auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw std::runtime_error("load_csv: column '" + name + "' not found in " +
                               path.string());
    }
    return static_cast<int>(it - header.begin());
  };

  const int label_idx = find_col(schema.label_col);
  std::vector<int> feature_idx;
  if (schema.feature_cols.empty()) {
    for (int c = 0; c < static_cast<int>(header.size()); ++c) {
      if (c != label_idx) feature_idx.push_back(c);
    }
  } else {
    for (const auto& name : schema.feature_cols) feature_idx.push_back(find_col(name));
  }
  if (feature_idx.empty()) {
    throw std::runtime_error("load_csv: no feature columns");
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> raw_labels;
  int row_number = 0;
  while (std::getline(in, line)) {
    ++row_number;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("load_csv: row " + std::to_string(row_number) +
                               " has " + std::to_string(cells.size()) +
                               " cells, expected " + std::to_string(header.size()));
    }
    std::vector<double> features;
    features.reserve(feature_idx.size());
    for (const int c : feature_idx) {
      double v;
      if (!parse_double(cells[static_cast<std::size_t>(c)], v)) {
        throw std::runtime_error("load_csv: unparseable cell '" +
                                 cells[static_cast<std::size_t>(c)] + "' in column '" +
                                 header[static_cast<std::size_t>(c)] + "' at row " +
                                 std::to_string(row_number));
      }
      features.push_back(v);
    }
    double label;
    if (!parse_double(cells[static_cast<std::size_t>(label_idx)], label)) {
      throw std::runtime_error("load_csv: unparseable label at row " +
                               std::to_string(row_number));
    }
    rows.push_back(std::move(features));
    raw_labels.push_back(label);
  }
  if (rows.empty()) {
    throw std::runtime_error("load_csv: no data rows in " + path.string());
  }

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(feature_idx.size());
  Eigen::MatrixXd features(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      features(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }
  }

  if (schema.task == Task::regression) {
    Eigen::VectorXd labels(n);
    for (int i = 0; i < n; ++i) labels[i] = raw_labels[static_cast<std::size_t>(i)];
    return Dataset::make_regression(std::move(features), std::move(labels));
  }

  // Dense class indices in first-appearance order.
  std::vector<double> seen;
  std::vector<int> labels(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double raw = raw_labels[static_cast<std::size_t>(i)];
    const auto it = std::find(seen.begin(), seen.end(), raw);
    if (it == seen.end()) {
      seen.push_back(raw);
      labels[static_cast<std::size_t>(i)] = static_cast<int>(seen.size()) - 1;
    } else {
      labels[static_cast<std::size_t>(i)] = static_cast<int>(it - seen.begin());
    }
  }
  return Dataset::make_classification(std::move(features), std::move(labels),
                                      std::max<int>(2, static_cast<int>(seen.size())));
}

void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::vector<std::string>& feature_names) {
  if (!feature_names.empty() &&
      feature_names.size() != static_cast<std::size_t>(data.dims())) {
    throw std::invalid_argument("write_csv: feature name count mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("write_csv: cannot open " + path.string());
  }
  const bool has_tags = !data.region_tags.empty();
  for (int c = 0; c < data.dims(); ++c) {
    out << (feature_names.empty() ? "f" + std::to_string(c)
                                  : feature_names[static_cast<std::size_t>(c)])
        << ',';
  }
  out << "label";
  if (has_tags) out << ",region";
  out << '\n';
  for (int i = 0; i < data.rows(); ++i) {
    for (int c = 0; c < data.dims(); ++c) {
      out << format_double(data.features(i, c)) << ',';
    }
    if (data.task == Task::classification) {
      out << data.class_label(i);
    } else {
      out << format_double(data.labels[i]);
    }
    if (has_tags) out << ',' << data.region_tags[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

namespace {

Dataset subset(const Dataset& data, const std::vector<int>& idx) {
  Eigen::MatrixXd features(static_cast<int>(idx.size()), data.dims());
  Eigen::VectorXd labels(static_cast<int>(idx.size()));
  std::vector<int> tags;
  if (!data.region_tags.empty()) tags.reserve(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    features.row(static_cast<Eigen::Index>(k)) = data.features.row(idx[k]);
    labels[static_cast<Eigen::Index>(k)] = data.labels[idx[k]];
    if (!data.region_tags.empty()) {
      tags.push_back(data.region_tags[static_cast<std::size_t>(idx[k])]);
    }
  }
  Dataset out;
  out.features = std::move(features);
  out.labels = std::move(labels);
  out.task = data.task;
  out.num_classes = data.num_classes;
  out.region_tags = std::move(tags);
  out.validate();
  return out;
}

// Quantile-bin assignment for regression stratification.
std::vector<int> quantile_bins(const Eigen::VectorXd& y, int bins) {
  const int n = static_cast<int>(y.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return y[a] < y[b] || (y[a] == y[b] && a < b); });
  std::vector<int> bin(static_cast<std::size_t>(n));
  for (int rank = 0; rank < n; ++rank) {
    const int b = std::min(bins - 1, rank * bins / n);
    bin[static_cast<std::size_t>(order[static_cast<std::size_t>(rank)])] = b;
  }
  return bin;
}

}  // namespace

SplitResult split(const Dataset& data, const SplitOptions& options) {
  if (options.test_fraction <= 0.0 || options.test_fraction >= 1.0) {
    throw std::invalid_argument("split: test_fraction must be in (0, 1)");
  }
  const int n = data.rows();
  SplitResult result;
  Rng rng(options.seed);

  std::vector<int> strata(static_cast<std::size_t>(n), 0);
  if (options.stratify) {
    if (data.task == Task::classification) {
      for (int i = 0; i < n; ++i) strata[static_cast<std::size_t>(i)] = data.class_label(i);
    } else {
      if (options.bins < 1) throw std::invalid_argument("split: bins must be >= 1");
      strata = quantile_bins(data.labels, std::min(options.bins, n));
    }
  }

  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < n; ++i) groups[strata[static_cast<std::size_t>(i)]].push_back(i);

  // Degenerate strata: merge into the previous bin (regression) or fall back
  // to a single unstratified group (classification).
  if (options.stratify) {
    if (data.task == Task::regression) {
      bool merged = true;
      while (merged && groups.size() > 1) {
        merged = false;
        for (auto it = groups.begin(); it != groups.end(); ++it) {
          if (it->second.size() < 2) {
            auto neighbor = it == groups.begin() ? std::next(it) : std::prev(it);
            neighbor->second.insert(neighbor->second.end(), it->second.begin(),
                                    it->second.end());
            std::sort(neighbor->second.begin(), neighbor->second.end());
            result.notes.push_back("merged stratum " + std::to_string(it->first) +
                                   " into " + std::to_string(neighbor->first));
            groups.erase(it);
            merged = true;
            break;
          }
        }
      }
    } else {
      for (const auto& [key, members] : groups) {
        if (members.size() < 2) {
          result.notes.push_back("stratum " + std::to_string(key) +
                                 " smaller than 2; unstratified fallback");
          std::vector<int> all(static_cast<std::size_t>(n));
          for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
          groups.clear();
          groups[0] = std::move(all);
          break;
        }
      }
    }
  }

  std::vector<int> train_idx;
  std::vector<int> test_idx;
  for (auto& [key, members] : groups) {
    rng.shuffle(members);
    int n_test = static_cast<int>(std::floor(
        static_cast<double>(members.size()) * options.test_fraction + 0.5));
    n_test = std::clamp(n_test, 1, static_cast<int>(members.size()) - 1);
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < static_cast<std::size_t>(n_test) ? test_idx : train_idx)
          .push_back(members[k]);
    }
  }

  if (options.balance_train && data.task == Task::classification) {
    std::map<int, std::vector<int>> by_class;
    for (const int i : train_idx) by_class[data.class_label(i)].push_back(i);
    std::size_t minority = train_idx.size();
    for (const auto& [c, members] : by_class) minority = std::min(minority, members.size());
    std::vector<int> balanced;
    for (auto& [c, members] : by_class) {
      rng.shuffle(members);
      balanced.insert(balanced.end(), members.begin(), members.begin() +
                      static_cast<std::ptrdiff_t>(minority));
    }
    train_idx = std::move(balanced);
    result.notes.push_back("balanced training split to " +
                           std::to_string(minority) + " per class");
  }

  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  result.train = subset(data, train_idx);
  result.test = subset(data, test_idx);
  return result;
}

}  // namespace iabma
