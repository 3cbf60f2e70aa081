#pragma once

#include <random>
#include <span>
#include <utility>

#include "grasskern/grassmann.hpp"

namespace grasskern {

using Rng = std::mt19937_64;

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// Haar-distributed element of O(n); reflections included.
Matrix random_orthogonal(Eigen::Index n, Rng& rng);

/// Uniform point on G(p, d), via QR of a Gaussian matrix.
Subspace random_subspace(Eigen::Index d, Eigen::Index p, Rng& rng);

/// Two subspaces of R^d whose principal angles are exactly `angles`
/// (p = angles.size(), needs d >= 2p), in a random frame and with random
/// basis representatives.
std::pair<Subspace, Subspace> subspace_pair_with_angles(Eigen::Index d, std::span<const double> angles, Rng& rng);

}  // namespace grasskern
