#include "grasskern/sampling.hpp"

#include <cmath>

#include "grasskern/error.hpp"

namespace grasskern {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  // column-major fill order keeps streams reproducible
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

Matrix random_orthogonal(Eigen::Index n, Rng& rng) { return numerics::orthonormalize(gaussian_matrix(n, n, rng)); }

Subspace random_subspace(Eigen::Index d, Eigen::Index p, Rng& rng) {
  if (p <= 0 || p >= d) throw InvalidDimensions("random subspace needs 0 < p < d");
  return Subspace(numerics::orthonormalize(gaussian_matrix(d, p, rng)));
}

std::pair<Subspace, Subspace> subspace_pair_with_angles(Eigen::Index d, std::span<const double> angles,
                                                        Rng& rng) {
  const auto p = static_cast<Eigen::Index>(angles.size());
  if (p == 0 || 2 * p > d) throw InvalidDimensions("prescribed-angle pair needs 0 < 2p <= d");
  const Matrix frame = random_orthogonal(d, rng);
  Matrix x = frame.leftCols(p);
  Matrix y(d, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double t = angles[static_cast<std::size_t>(i)];
    y.col(i) = std::cos(t) * frame.col(i) + std::sin(t) * frame.col(p + i);
  }
  return {Subspace(x * random_orthogonal(p, rng)), Subspace(y * random_orthogonal(p, rng))};
}

}  // namespace grasskern
