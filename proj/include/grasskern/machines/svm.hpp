#pragma once

// Binary soft-margin kernel SVM on a precomputed Gram matrix.
// The dual is solved by SMO-style two-variable decomposition with
// maximal-violating-pair selection. Conditionally pd Grams are accepted as
// is: the equality constraint sum(alpha_i y_i) = 0 makes the dual blind to
// K -> K + c 11^T.

#include <span>
#include <vector>

#include "grasskern/kernels.hpp"

namespace grasskern::machines {

struct SvmOptions {
  double kkt_tolerance = 1e-6;
  std::size_t max_iterations = 1'000'000;
  // Diagnostic only: train on K + shift * 11^T.
  double kernel_shift = 0.0;
};

struct SvmModel {
  std::vector<int> support_indices{};        // into the training set
  std::vector<double> dual_coefficients{};   // alpha_i * y_i
  double bias = 0.0;
  double C = 1.0;
  KernelSpec spec;
  std::vector<Subspace> training_refs{};     // support vectors, same order; may be empty
  std::vector<double> alphas{};              // alpha_i over the full training set
  std::size_t iterations = 0;
  double kkt_residual = 0.0;               // max violation m(alpha) - M(alpha) at exit
  double duality_gap = 0.0;
  double kernel_shift = 0.0;               // added to every kernel value at prediction
  bool converged = false;
};

/// Labels must be +1/-1 with both classes present (DegenerateLabels
/// otherwise). `refs`, when given, are the training subspaces in Gram order;
/// the support vectors among them are retained for svm_predict.
/// Non-convergence is reported through `converged` and `duality_gap`.
SvmModel svm_train(const GramMatrix& gram, std::span<const int> labels, double C,
                   std::span<const Subspace> refs = {}, const SvmOptions& options = {});

struct SvmPrediction {
  int label;
  double decision_value;
};

/// sign(sum dual_i k(query, ref_i) + bias), ties to +1.
SvmPrediction svm_predict(const SvmModel& model, const Subspace& query);

/// Same rule from kernel values against the *whole* training set, in Gram
/// order (useful when only Gram rows are available).
SvmPrediction svm_predict_from_row(const SvmModel& model, const Vector& kernel_row_full);

}  // namespace grasskern::machines
