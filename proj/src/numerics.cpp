#include "grasskern/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "grasskern/error.hpp"

namespace grasskern::numerics {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Fill column k of u with a unit vector orthogonal to the first `filled`
// columns listed in `done`.
void complete_column(Matrix& u, Eigen::Index k, const std::vector<Eigen::Index>& done) {
  const Eigen::Index rows = u.rows();
  Vector best;
  double best_norm = -1.0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    Vector v = Vector::Unit(rows, r);
    for (auto j : done) v -= u.col(j) * u.col(j).dot(v);
    const double nrm = v.norm();
    if (nrm > best_norm) {
      best_norm = nrm;
      best = v;
    }
  }
  for (auto j : done) best -= u.col(j) * u.col(j).dot(best);
  u.col(k) = best.normalized();
}

}  // namespace

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw NonFiniteEntry("matrix " + shape(m) + " has non-finite entries");
}

SvdResult svd(const Matrix& m, std::size_t max_sweeps) {
  require_finite(m);
  if (m.rows() < m.cols()) {
    SvdResult t = svd(m.transpose(), max_sweeps);
    std::swap(t.U, t.V);
    return t;
  }
  const Eigen::Index n = m.cols();
  Matrix u = m;
  Matrix v = Matrix::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();

  std::size_t sweeps = 0;
  for (bool rotated = true; rotated;) {
    if (sweeps == max_sweeps) throw ConvergenceFailure("jacobi svd of " + shape(m) + " did not converge", sweeps);
    ++sweeps;
    rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double alpha = u.col(i).squaredNorm();
        const double beta = u.col(j).squaredNorm();
        const double gamma = u.col(i).dot(u.col(j));
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        const Vector ui = u.col(i);
        u.col(i) = c * ui - s * u.col(j);
        u.col(j) = s * ui + c * u.col(j);
        const Vector vi = v.col(i);
        v.col(i) = c * vi - s * v.col(j);
        v.col(j) = s * vi + c * v.col(j);
      }
    }
  }

  Vector sigma(n);
  for (Eigen::Index i = 0; i < n; ++i) sigma(i) = u.col(i).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return sigma(a) > sigma(b); });

  SvdResult out{Matrix(m.rows(), n), Vector(n), Matrix(n, n)};
  std::vector<Eigen::Index> done;
  std::vector<Eigen::Index> zero;
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto src = order[static_cast<std::size_t>(k)];
    out.singular_values(k) = sigma(src);
    out.V.col(k) = v.col(src);
    if (sigma(src) > std::numeric_limits<double>::min()) {
      out.U.col(k) = u.col(src) / sigma(src);
      done.push_back(k);
    } else {
      out.singular_values(k) = 0.0;
      zero.push_back(k);
    }
  }
  for (auto k : zero) {
    complete_column(out.U, k, done);
    done.push_back(k);
  }
  return out;
}

Matrix orthonormalize(const Matrix& m) {
  require_finite(m);
  if (m.rows() < m.cols() || m.cols() == 0)
    throw RankDeficient("cannot orthonormalize " + shape(m) + ": needs rows >= cols > 0");
  const Vector s = singular_values(m);
  if (s(0) == 0.0 || s(s.size() - 1) < 1e-10 * s(0))
    throw RankDeficient("matrix " + shape(m) + " is rank deficient (sigma_min/sigma_max = " +
                        std::to_string(s(0) == 0.0 ? 0.0 : s(s.size() - 1) / s(0)) + ")");
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const auto& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

SymmetricEigen symmetric_eigen(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigensolve needs a square matrix, got " + shape(m));
  require_finite(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric eigensolve of " + shape(m) + " failed",
                             static_cast<std::size_t>(30 * m.rows()));
  return {es.eigenvalues(), es.eigenvectors()};
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigensolve needs a square matrix, got " + shape(m));
  require_finite(m);
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw ConvergenceFailure("symmetric eigensolve of " + shape(m) + " failed",
                             static_cast<std::size_t>(30 * m.rows()));
  return es.eigenvalues();
}

double determinant(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("determinant needs a square matrix, got " + shape(m));
  if (m.rows() == 0) return 1.0;
  if (m.rows() == 1) return m(0, 0);
  if (m.rows() == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return Eigen::PartialPivLU<Matrix>(m).determinant();
}

double frobenius_sq(const Matrix& m) { return m.squaredNorm(); }

}  // namespace grasskern::numerics
