#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iabma {

// Log-probabilities are clamped to this floor before storage so a vanishing
// density cannot destroy mixtures, ELBO terms, or the Theorem-1 checks.
// exp(-30) ~ 9.4e-14 is below the resolution of any reported metric.
inline constexpr double kLogFloor = -30.0;

// Probability vectors are validated on the simplex with this tolerance;
// violations within it are renormalized, beyond it rejected.
inline constexpr double kSimplexTol = 1e-9;

enum class Task { classification, regression };

std::string to_string(Task task);
Task task_from_string(const std::string& s);

struct TaskError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic random streams.
//
// All stochastic steps in the project run on mt19937_64 with the transforms
// below, so streams are reproducible bit-for-bit across platforms and runs
// (std::uniform_real_distribution and friends are implementation-defined and
// deliberately avoided).
// ---------------------------------------------------------------------------

// SplitMix64 finalizer (Steele et al.); the documented stable mixing function
// used to derive per-repetition and per-component seeds from a master seed.
std::uint64_t splitmix64(std::uint64_t x);

// derive_seed(master, k) gives independent streams for k = 0, 1, 2, ...
// Adding streams never perturbs earlier ones.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // 53-bit mantissa uniform in [0, 1).
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; generates pairs and caches the spare.
  double gaussian();

  // Uniform integer in [0, n). Modulo of a 64-bit draw; bias is < n / 2^64.
  int uniform_int(int n);

  // Fisher-Yates.
  void shuffle(std::vector<int>& v);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Value types
// ---------------------------------------------------------------------------

// A length-m vector of nonnegative weights summing to 1. Holds adaptive
// weights alpha(x), prior masses, and posterior outputs.
class SimplexWeights {
 public:
  // Validates and, when the sum is within kSimplexTol of 1, renormalizes
  // exactly. Entries in [-kSimplexTol, 0) are clamped to 0. Throws
  // std::invalid_argument otherwise.
  explicit SimplexWeights(Eigen::VectorXd weights);

  static SimplexWeights uniform(int m);
  static SimplexWeights one_hot(int m, int index);

  const Eigen::VectorXd& values() const { return weights_; }
  double operator[](Eigen::Index j) const { return weights_[j]; }
  int size() const { return static_cast<int>(weights_.size()); }

  // Lowest index among maximal entries.
  int argmax() const;

 private:
  Eigen::VectorXd weights_;
};

struct Dataset {
  Eigen::MatrixXd features;      // n x d
  Eigen::VectorXd labels;        // class index (stored as double) or target
  Task task = Task::classification;
  int num_classes = 0;           // >= 2 for classification, 0 for regression
  std::vector<int> region_tags;  // empty, or length n; analysis only

  int rows() const { return static_cast<int>(features.rows()); }
  int dims() const { return static_cast<int>(features.cols()); }
  int class_label(int i) const { return static_cast<int>(labels[i]); }

  // num_classes = 0 infers C = max(label) + 1, floored at 2.
  static Dataset make_classification(Eigen::MatrixXd features,
                                     std::vector<int> labels,
                                     int num_classes = 0,
                                     std::vector<int> region_tags = {});
  static Dataset make_regression(Eigen::MatrixXd features,
                                 Eigen::VectorXd labels,
                                 std::vector<int> region_tags = {});

  // Throws std::invalid_argument on any invariant violation.
  void validate() const;
};

// Per-example, per-model predictive log-likelihoods log f_j(y_i | x_i);
// the currency flowing between predictors, prior, posterior, and baselines.
struct LikelihoodTable {
  Eigen::MatrixXd loglik;  // n x m, every entry finite and >= kLogFloor
  std::vector<std::string> model_names;
  Task task = Task::classification;

  int rows() const { return static_cast<int>(loglik.rows()); }
  int models() const { return static_cast<int>(loglik.cols()); }

  // Clamps entries to kLogFloor and validates (finiteness; for
  // classification, exp(entry) <= 1 + 1e-9).
  static LikelihoodTable make(Eigen::MatrixXd raw_loglik,
                              std::vector<std::string> model_names, Task task);
};

// Per-example ensemble predictive distribution sum_j w_ij f_j(y | x_i).
struct MixturePrediction {
  Task task = Task::classification;
  std::vector<SimplexWeights> weights;  // n rows of per-model weights
  Eigen::VectorXd loglik;               // n; mixture loglik of the true label
  Eigen::MatrixXd class_probs;          // n x C (classification), else empty
  Eigen::VectorXd mean;                 // n (regression), else empty
};

// ---------------------------------------------------------------------------
// Numerically stable primitives
// ---------------------------------------------------------------------------

// log(sum_i exp(v_i)) by max subtraction; exact for a single element.
// Requires a nonempty input with at least one finite entry (-inf entries are
// permitted and contribute nothing).
double log_sum_exp(std::span<const double> values);
double log_sum_exp(const Eigen::VectorXd& values);

// weights_j = exp(e_j - log_sum_exp(e)). Rejects NaN input.
SimplexWeights softmax(const Eigen::VectorXd& energies);

// log sum_j w_j exp(l_j) via log-sum-exp over log(w_j) + l_j; entries with
// w_j = 0 are skipped.
double mixture_loglik(const SimplexWeights& weights,
                      const Eigen::VectorXd& row_logliks);

}  // namespace iabma
