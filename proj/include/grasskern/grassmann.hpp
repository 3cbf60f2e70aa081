#pragma once

// Points on the Grassmannian G(p, d), principal angles, the geodesic,
// Binet-Cauchy and projection distances, and the explicit Plucker and
// projection embeddings (small scale, used as oracles).

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "grasskern/numerics.hpp"

namespace grasskern {

/// A p-dimensional subspace of R^d held as a d x p orthonormal basis.
/// Immutable after construction.
class Subspace {
 public:
  /// Takes ownership of an orthonormal basis. Throws InvalidSubspace unless
  /// 0 < p < d and basis^T basis = I_p within 1e-10.
  explicit Subspace(Matrix basis);

  /// Span of an arbitrary full-column-rank matrix (orthonormalized first).
  static Subspace from_span(const Matrix& m);

  const Matrix& basis() const noexcept { return basis_; }
  Eigen::Index ambient_dim() const noexcept { return basis_.rows(); }
  Eigen::Index dim() const noexcept { return basis_.cols(); }

  Matrix projector() const { return basis_ * basis_.transpose(); }

  /// Same subspace, different representative: basis * r for orthogonal r.
  Subspace rebased(const Matrix& r) const;

 private:
  Matrix basis_;
};

/// Equality of subspaces: projectors agree within tol in Frobenius norm.
bool same_subspace(const Subspace& x, const Subspace& y, double tol = 1e-8);

struct PrincipalAngles {
  std::vector<double> angles;  // ascending, each in [0, pi/2]
};

struct PluckerVector {
  Vector coords;  // p x p minors, row subsets in lexicographic order
};

inline constexpr std::size_t kDefaultEmbeddingCap = 10'000;

/// x^T y after checking that (d, p) agree. Throws DimensionMismatch.
Matrix overlap(const Subspace& x, const Subspace& y);

PrincipalAngles principal_angles(const Subspace& x, const Subspace& y);

double geodesic_distance(const Subspace& x, const Subspace& y);

/// |det(x^T y)|, the Plucker inner product.
double bc_inner(const Subspace& x, const Subspace& y);

/// ||x^T y||_F^2, the projection-embedding inner product.
double proj_inner(const Subspace& x, const Subspace& y);

/// 1 - |det(x^T y)| and p - ||x^T y||_F^2, computed from the component of
/// y orthogonal to x so they stay accurate as the subspaces approach each
/// other.
double bc_complement(const Subspace& x, const Subspace& y);
double proj_complement(const Subspace& x, const Subspace& y);

/// 2 - 2 |det(x^T y)|
double bc_distance_sq(const Subspace& x, const Subspace& y);

/// 2p - 2 ||x^T y||_F^2
double proj_distance_sq(const Subspace& x, const Subspace& y);

PluckerVector plucker_embed(const Subspace& x, std::size_t cap = kDefaultEmbeddingCap);

/// Order-q compound: C(rows,q) x C(cols,q) minors, lexicographic in both
/// row and column subsets. Throws EmbeddingTooLarge past `cap` entries.
Matrix compound_matrix(const Matrix& m, int q, std::size_t cap = kDefaultEmbeddingCap);

/// x x^T
Matrix projection_embed(const Subspace& x);

/// bc_distance_sq / geodesic_distance^2. Throws DegenerateRatio when the
/// subspaces coincide.
double curve_length_ratio(const Subspace& x, const Subspace& y);

/// n choose k, saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

/// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> index_subsets(int n, int k);

/// 64-bit FNV-1a over dimensions and raw basis entries, as 16 hex digits.
std::string fingerprint(std::span<const Subspace> data);

}  // namespace grasskern
