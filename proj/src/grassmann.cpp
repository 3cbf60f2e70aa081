#include "grasskern/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <utility>

#include "grasskern/error.hpp"

namespace grasskern {

namespace {

std::string dims(const Subspace& x) {
  return "G(" + std::to_string(x.dim()) + "," + std::to_string(x.ambient_dim()) + ")";
}

// Pairwise quantities are evaluated with the arguments in a fixed order so
// that f(x, y) and f(y, x) agree bit for bit.
std::pair<const Subspace&, const Subspace&> ordered(const Subspace& x, const Subspace& y) {
  const Matrix& a = x.basis();
  const Matrix& b = y.basis();
  if (a.size() == b.size() && std::lexicographical_compare(b.data(), b.data() + b.size(), a.data(), a.data() + a.size()))
    return {y, x};
  return {x, y};
}

}  // namespace

Subspace::Subspace(Matrix basis) : basis_(std::move(basis)) {
  const auto d = basis_.rows();
  const auto p = basis_.cols();
  if (p <= 0 || p >= d)
    throw InvalidSubspace("subspace needs 0 < p < d, got p=" + std::to_string(p) + " d=" + std::to_string(d));
  if (!basis_.allFinite()) throw InvalidSubspace("subspace basis has non-finite entries");
  const double err = (basis_.transpose() * basis_ - Matrix::Identity(p, p)).cwiseAbs().maxCoeff();
  if (err > 1e-10) throw InvalidSubspace("basis is not orthonormal (max |X^T X - I| = " + std::to_string(err) + ")");
}

Subspace Subspace::from_span(const Matrix& m) { return Subspace(numerics::orthonormalize(m)); }

Subspace Subspace::rebased(const Matrix& r) const {
  if (r.rows() != dim() || r.cols() != dim())
    throw DimensionMismatch("rebase needs a " + std::to_string(dim()) + "x" + std::to_string(dim()) + " matrix");
  return Subspace(basis_ * r);
}

bool same_subspace(const Subspace& x, const Subspace& y, double tol) {
  if (x.ambient_dim() != y.ambient_dim() || x.dim() != y.dim()) return false;
  return (x.projector() - y.projector()).norm() <= tol;
}

Matrix overlap(const Subspace& x, const Subspace& y) {
  if (x.ambient_dim() != y.ambient_dim() || x.dim() != y.dim())
    throw DimensionMismatch("subspaces live on different Grassmannians: " + dims(x) + " vs " + dims(y));
  return x.basis().transpose() * y.basis();
}

PrincipalAngles principal_angles(const Subspace& x_in, const Subspace& y_in) {
  const auto [x, y] = ordered(x_in, y_in);
  const Matrix xy = overlap(x, y);
  const Vector cosines = numerics::singular_values(xy);  // descending
  // Small angles are taken from the sines (singular values of the part of
  // y orthogonal to x); arccos loses half the digits near 1.
  const Matrix residual = y.basis() - x.basis() * xy;
  const Vector sines_desc = numerics::singular_values(residual);
  const auto p = static_cast<std::size_t>(x.dim());
  PrincipalAngles out;
  out.angles.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    const double c = std::clamp(cosines(static_cast<Eigen::Index>(i)), 0.0, 1.0);
    const double s = std::clamp(sines_desc(static_cast<Eigen::Index>(p - 1 - i)), 0.0, 1.0);
    out.angles[i] = c >= std::numbers::sqrt2 / 2 ? std::asin(s) : std::acos(c);
  }
  std::sort(out.angles.begin(), out.angles.end());
  return out;
}

double geodesic_distance(const Subspace& x, const Subspace& y) {
  double sum = 0.0;
  for (double t : principal_angles(x, y).angles) sum += t * t;
  return std::sqrt(sum);
}

double bc_inner(const Subspace& x, const Subspace& y) {
  const auto [a, b] = ordered(x, y);
  return std::abs(numerics::determinant(overlap(a, b)));
}

double proj_inner(const Subspace& x, const Subspace& y) {
  const auto [a, b] = ordered(x, y);
  return overlap(a, b).squaredNorm();
}

double bc_complement(const Subspace& x, const Subspace& y) {
  const auto [a, b] = ordered(x, y);
  const Matrix m = overlap(a, b);
  const Matrix r = b.basis() - a.basis() * m;
  // eigenvalues of R^T R are sin^2 of the principal angles
  const Vector sin2 = numerics::symmetric_eigenvalues(r.transpose() * r);
  double log_prod_cos = 0.0;
  for (Eigen::Index i = 0; i < sin2.size(); ++i) log_prod_cos += 0.5 * std::log1p(-std::clamp(sin2(i), 0.0, 1.0));
  return -std::expm1(log_prod_cos);
}

double proj_complement(const Subspace& x, const Subspace& y) {
  const auto [a, b] = ordered(x, y);
  const Matrix m = overlap(a, b);
  return (b.basis() - a.basis() * m).squaredNorm();
}

double bc_distance_sq(const Subspace& x, const Subspace& y) { return 2.0 - 2.0 * bc_inner(x, y); }

double proj_distance_sq(const Subspace& x, const Subspace& y) {
  return 2.0 * static_cast<double>(x.dim()) - 2.0 * proj_inner(x, y);
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    if (r > std::numeric_limits<std::size_t>::max() / num) return std::numeric_limits<std::size_t>::max();
    r = r * num / i;
  }
  return r;
}

std::vector<std::vector<int>> index_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

Matrix compound_matrix(const Matrix& m, int q, std::size_t cap) {
  if (q <= 0 || q > std::min(m.rows(), m.cols()))
    throw DimensionMismatch("compound order " + std::to_string(q) + " invalid for " + std::to_string(m.rows()) +
                            "x" + std::to_string(m.cols()));
  const auto nr = binomial(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(q));
  const auto nc = binomial(static_cast<std::size_t>(m.cols()), static_cast<std::size_t>(q));
  if (nr > cap || nc > cap || nr * nc > cap)
    throw EmbeddingTooLarge("compound of order " + std::to_string(q) + " would have " + std::to_string(nr) + "x" +
                            std::to_string(nc) + " entries (cap " + std::to_string(cap) + ")");
  const auto rows = index_subsets(static_cast<int>(m.rows()), q);
  const auto cols = index_subsets(static_cast<int>(m.cols()), q);
  Matrix out(static_cast<Eigen::Index>(nr), static_cast<Eigen::Index>(nc));
  Matrix sub(q, q);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (int a = 0; a < q; ++a)
        for (int b = 0; b < q; ++b)
          sub(a, b) = m(rows[i][static_cast<std::size_t>(a)], cols[j][static_cast<std::size_t>(b)]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = numerics::determinant(sub);
    }
  }
  return out;
}

PluckerVector plucker_embed(const Subspace& x, std::size_t cap) {
  return {compound_matrix(x.basis(), static_cast<int>(x.dim()), cap).col(0)};
}

Matrix projection_embed(const Subspace& x) { return x.projector(); }

double curve_length_ratio(const Subspace& x, const Subspace& y) {
  const double g = geodesic_distance(x, y);
  if (g <= 1e-12) throw DegenerateRatio("curve length ratio undefined for coincident subspaces");
  return bc_distance_sq(x, y) / (g * g);
}

std::string fingerprint(std::span<const Subspace> data) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  const std::uint64_t n = data.size();
  mix(&n, sizeof n);
  for (const auto& s : data) {
    const std::int64_t d = s.ambient_dim();
    const std::int64_t p = s.dim();
    mix(&d, sizeof d);
    mix(&p, sizeof p);
    mix(s.basis().data(), sizeof(double) * static_cast<std::size_t>(s.basis().size()));
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace grasskern
