#pragma once

// Kernel sparse coding: minimize
//   y^T K_DD y - 2 y^T k_DX + k_XX + lambda ||y||_1
// by cyclic coordinate descent with exact soft-threshold steps.

#include <span>
#include <vector>

#include "grasskern/kernels.hpp"

namespace grasskern::machines {

struct SparseCode {
  Vector coefficients;
  double lambda = 0.0;
  std::vector<double> objective_history;  // at y = 0, then after every sweep
  std::size_t sweeps = 0;
  bool converged = false;
};

struct SparseCodingOptions {
  double tolerance = 1e-8;  // max coefficient change per sweep
  std::size_t max_sweeps = 10'000;
  bool check_dictionary = true;  // certify K_DD positive semidefinite first
};

double sparse_objective(const Matrix& dict_gram, const Vector& query_column, double query_self, double lambda,
                        const Vector& y);

/// Throws NotPositiveSemidefinite for an indefinite dictionary Gram and
/// InvalidKernelParameter unless lambda > 0.
SparseCode kernel_sparse_code(const GramMatrix& dict_gram, const Vector& query_column, double query_self,
                              double lambda, const SparseCodingOptions& options = {});
SparseCode kernel_sparse_code(const Matrix& dict_gram, const Vector& query_column, double query_self,
                              double lambda, const SparseCodingOptions& options = {});

/// Label of the atom with the largest |y_i|, lowest index on ties. Throws
/// ZeroCode when every coefficient is zero.
int sparse_code_classify(const SparseCode& code, std::span<const int> atom_labels);

}  // namespace grasskern::machines
