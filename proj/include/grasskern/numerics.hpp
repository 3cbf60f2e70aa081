#pragma once

// Dense real-matrix primitives used by the rest of the library. Storage is
// Eigen's column-major MatrixXd throughout.

#include <Eigen/Dense>

#include <cstddef>

namespace grasskern {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace numerics {

/// Thin SVD m = U diag(s) V^T with s descending and nonnegative.
/// U is rows x r, V is cols x r, r = min(rows, cols).
struct SvdResult {
  Matrix U;
  Vector singular_values;
  Matrix V;
};

// Throws NonFiniteEntry if any entry is NaN or Inf.
void require_finite(const Matrix& m);

/// One-sided Jacobi SVD. Throws ConvergenceFailure (with the sweep count)
/// if the column pairs fail to orthogonalize within max_sweeps.
SvdResult svd(const Matrix& m, std::size_t max_sweeps = 80);

inline Vector singular_values(const Matrix& m) { return svd(m).singular_values; }

/// Orthonormal basis of span(m) with positive R diagonal, so an already
/// orthonormal input comes back unchanged. Throws RankDeficient when the
/// smallest singular value is below 1e-10 times the largest.
Matrix orthonormalize(const Matrix& m);

/// Eigenvalues of (m + m^T)/2 in ascending order.
Vector symmetric_eigenvalues(const Matrix& m);

/// Symmetric eigendecomposition of (m + m^T)/2; eigenvalues ascending,
/// eigenvectors in matching columns.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen symmetric_eigen(const Matrix& m);

double determinant(const Matrix& m);

double frobenius_sq(const Matrix& m);

}  // namespace numerics
}  // namespace grasskern
