#pragma once

// Grassmannian kernels built on the Binet-Cauchy (Plucker) inner product
// |det(X^T Y)| and the projection inner product ||X^T Y||_F^2, plus Gram
// assembly and empirical positive-definiteness certification.
//
//   family       binet_cauchy                    projection
//   baseline     det(X^T Y)^2                    ||X^T Y||^2
//   linear       |det|                           ||X^T Y||^2
//   polynomial   (beta + |det|)^alpha            (beta + ||.||^2)^alpha
//   rbf          exp(beta |det|)                 exp(beta ||.||^2)
//   laplace      exp(-beta sqrt(1 - |det|))      exp(-beta sqrt(p - ||.||^2))
//   binomial     (beta - |det|)^-alpha           (beta - ||.||^2)^-alpha
//   logarithm    -log(2 - |det|)                 -log(p + 1 - ||.||^2)
//
// Parameter bounds are open: polynomial beta > 0 with integer alpha >= 1;
// rbf and laplace beta > 0; binomial alpha > 0 and beta > 1 (bc) or
// beta > p (projection). Logarithm kernels are only conditionally pd.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "grasskern/grassmann.hpp"

namespace grasskern {

enum class Embedding { binet_cauchy, projection };
enum class Family { baseline, linear, polynomial, rbf, laplace, binomial, logarithm };
enum class Definiteness { pd, cpd };

std::string_view to_string(Embedding e);
std::string_view to_string(Family f);
std::string_view to_string(Definiteness m);
Embedding parse_embedding(std::string_view s);
Family parse_family(std::string_view s);

class KernelSpec {
 public:
  /// Validates eagerly; throws InvalidKernelParameter on any bound violation.
  /// Parameters a family does not use are normalized (alpha = 1, beta = 0).
  static KernelSpec make(Embedding embedding, Family family, Eigen::Index subspace_dim, double alpha = 1.0,
                         double beta = 0.0);

  /// Parses "embedding=projection family=rbf alpha=1 beta=0.5" (space or
  /// comma separated; alpha defaults to 1).
  static KernelSpec parse_record(std::string_view record, Eigen::Index subspace_dim);

  Embedding embedding() const noexcept { return embedding_; }
  Family family() const noexcept { return family_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  Eigen::Index subspace_dim() const noexcept { return p_; }

  Definiteness definiteness() const noexcept {
    return family_ == Family::logarithm ? Definiteness::cpd : Definiteness::pd;
  }

  /// Short label such as "rbf-projection".
  std::string name() const;
  std::string to_record() const;

  /// Kernel value as a function of the embedding's inner product.
  double from_inner(double inner) const;

  bool operator==(const KernelSpec&) const = default;

 private:
  KernelSpec(Embedding e, Family f, Eigen::Index p, double a, double b)
      : embedding_(e), family_(f), p_(p), alpha_(a), beta_(b) {}

  Embedding embedding_;
  Family family_;
  Eigen::Index p_;
  double alpha_;
  double beta_;
};

/// The ten kernels of the proposed family with default parameters.
std::vector<KernelSpec> table_kernels(Eigen::Index p);

/// Baselines, linear kernels and table_kernels: every kernel the library knows.
std::vector<KernelSpec> kernel_catalog(Eigen::Index p);

/// |det(x^T y)| or ||x^T y||_F^2 depending on the embedding.
double inner_product(Embedding e, const Subspace& x, const Subspace& y);

double evaluate(const KernelSpec& spec, const Subspace& x, const Subspace& y);

/// exp(-beta * geodesic_distance^2). Symmetric and basis invariant but NOT
/// a positive definite kernel; kept so the counter-example is reproducible.
double geodesic_rbf_pseudo_kernel(double beta, const Subspace& x, const Subspace& y);

struct GramMatrix {
  Matrix values;
  KernelSpec spec;
  std::string dataset_fingerprint;

  Eigen::Index size() const noexcept { return values.rows(); }
};

/// Upper triangle evaluated (optionally on several threads) and mirrored.
/// The result does not depend on the thread count.
GramMatrix gram(const KernelSpec& spec, std::span<const Subspace> data, unsigned threads = 1,
                std::string fingerprint_override = {});

/// Kernel values of `query` against every reference subspace.
Vector kernel_row(const KernelSpec& spec, std::span<const Subspace> refs, const Subspace& query);

struct CertificationReport {
  Definiteness mode;
  double min_eigenvalue;
  double max_eigenvalue;
  double tolerance;
  bool passed;
};

inline constexpr double kPdTolerance = 1e-8;

/// pd: spectrum of K. cpd: spectrum of J K J with J = I - 11^T/n.
/// Passes when min >= -tol * max.
CertificationReport certify_pd(const Matrix& gram, Definiteness mode, double tol = kPdTolerance);
inline CertificationReport certify_pd(const GramMatrix& gram, Definiteness mode, double tol = kPdTolerance) {
  return certify_pd(gram.values, mode, tol);
}

/// The four points of G(2, 3) from the classic counter-example, as printed
/// (four significant digits) and then re-orthonormalized.
std::vector<Subspace> counterexample_points();

}  // namespace grasskern
