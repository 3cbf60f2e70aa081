#include "grasskern/machines/sparse_coding.hpp"

#include <cmath>

#include "grasskern/error.hpp"

namespace grasskern::machines {

double sparse_objective(const Matrix& K, const Vector& k, double kxx, double lambda, const Vector& y) {
  return y.dot(K * y) - 2.0 * y.dot(k) + kxx + lambda * y.lpNorm<1>();
}

SparseCode kernel_sparse_code(const GramMatrix& dict_gram, const Vector& query_column, double query_self,
                              double lambda, const SparseCodingOptions& options) {
  return kernel_sparse_code(dict_gram.values, query_column, query_self, lambda, options);
}

SparseCode kernel_sparse_code(const Matrix& K, const Vector& k, double kxx, double lambda,
                              const SparseCodingOptions& options) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || k.size() != n)
    throw DimensionMismatch("kernel_sparse_code: dictionary Gram is " + std::to_string(K.rows()) + "x" +
                            std::to_string(K.cols()) + ", query column has " + std::to_string(k.size()) + " entries");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidKernelParameter("kernel_sparse_code: lambda must be > 0");
  numerics::require_finite(K);
  numerics::require_finite(k);
  if (options.check_dictionary) {
    const auto rep = certify_pd(K, Definiteness::pd);
    if (!rep.passed)
      throw NotPositiveSemidefinite("kernel_sparse_code: dictionary Gram has eigenvalue " +
                                    std::to_string(rep.min_eigenvalue));
  }

  SparseCode code{Vector::Zero(n), lambda, {}, 0, false};
  double objective = sparse_objective(K, k, kxx, lambda, code.coefficients);
  code.objective_history.push_back(objective);
  Vector& y = code.coefficients;
  Vector ky = Vector::Zero(n);  // K y, kept up to date
  const double half = lambda / 2.0;
  while (code.sweeps < options.max_sweeps) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double kjj = K(j, j);
      const double a = y(j);
      const double r = k(j) - (ky(j) - kjj * a);
      double next = 0.0;
      if (kjj > 0.0) next = r > half ? (r - half) / kjj : (r < -half ? (r + half) / kjj : 0.0);
      // f(t) = kjj t^2 - 2 r t + lambda |t| along coordinate j
      const double decrease = (a - next) * (kjj * (a + next) - 2.0 * r) + lambda * (std::abs(a) - std::abs(next));
      if (next != a && decrease > 0.0) {
        ky += (next - a) * K.col(j);
        y(j) = next;
        objective -= decrease;
        max_change = std::max(max_change, std::abs(next - a));
      }
    }
    ++code.sweeps;
    code.objective_history.push_back(objective);
    if (max_change < options.tolerance) {
      code.converged = true;
      break;
    }
  }
  return code;
}

int sparse_code_classify(const SparseCode& code, std::span<const int> atom_labels) {
  if (static_cast<std::size_t>(code.coefficients.size()) != atom_labels.size())
    throw DimensionMismatch("sparse_code_classify: code and label lengths differ");
  Eigen::Index best = -1;
  double best_v = 0.0;
  for (Eigen::Index i = 0; i < code.coefficients.size(); ++i) {
    const double v = std::abs(code.coefficients(i));
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  if (best < 0) throw ZeroCode("sparse_code_classify: every coefficient is zero");
  return atom_labels[static_cast<std::size_t>(best)];
}

}  // namespace grasskern::machines
