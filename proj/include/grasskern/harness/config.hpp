#pragma once

// Experiment configuration: a `key = value` file, overridable key by key.
// Recognized keys (defaults in parentheses):
//
//   task            gram | pd-check | svm | cluster | hash | sparse-code |
//                   bench | counterexample | generate
//   seed (0)        base seed; split s uses the pair (seed, s)
//   kernel          kernel record, repeatable; none means the task default
//   dataset         path of a dataset file; empty means generate one
//   d p classes per_class noise_angle orthogonal    generator (10 2 2 20 0.1 true)
//   splits (10)  train_fraction (0.5)
//   C (1)  k (0 = number of classes)  restarts (5)
//   bits (10 20 30)  anchors (30)  top_m (10)
//   lambda (0.01)
//   cv_grid (false)  cv_betas (0.25 0.5 1 2 4)  cv_alphas (1 2 3)
//   model_out       optional path for the trained svm model / hash family
//   threads (1)     worker count; never changes results
//   out             report path; the text table goes to <out>.txt

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace grasskern::harness {

struct ExperimentConfig {
  std::string task = "bench";
  std::uint64_t seed = 0;
  std::vector<std::string> kernels;

  std::string dataset;
  long long d = 10;
  long long p = 2;
  int classes = 2;
  int per_class = 20;
  double noise_angle = 0.1;
  bool orthogonal = true;

  int splits = 10;
  double train_fraction = 0.5;
  double C = 1.0;
  int k = 0;
  int restarts = 5;
  std::vector<int> bits = {10, 20, 30};
  int anchors = 30;
  int top_m = 10;
  double lambda = 0.01;

  bool cv_grid = false;
  std::vector<double> cv_betas = {0.25, 0.5, 1, 2, 4};
  std::vector<double> cv_alphas = {1, 2, 3};

  std::string model_out;
  unsigned threads = 1;
  std::string out;

  /// Applies one `key = value` setting. `kernel` appends; everything else
  /// replaces. Throws ParseError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
};

ExperimentConfig parse_config(std::string_view text);

/// Every task-relevant key in a fixed order, one `key = value` per line.
/// `threads` and `out` are left out: they do not affect results.
std::string config_to_text(const ExperimentConfig& config);

inline const std::vector<std::string_view>& known_tasks() {
  static const std::vector<std::string_view> tasks = {"gram",       "pd-check", "svm",   "cluster",       "hash",
                                                      "sparse-code", "bench",    "counterexample", "generate"};
  return tasks;
}

}  // namespace grasskern::harness
