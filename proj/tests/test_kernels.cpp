#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "grasskern/error.hpp"
#include "grasskern/kernels.hpp"
#include "grasskern/sampling.hpp"

using namespace grasskern;
using std::numbers::pi;

namespace {

Subspace line(double angle) {
  Matrix m(2, 1);
  m << std::cos(angle), std::sin(angle);
  return Subspace(m);
}

std::vector<Subspace> random_set(Eigen::Index d, Eigen::Index p, int n, Rng& rng) {
  std::vector<Subspace> out;
  for (int i = 0; i < n; ++i) out.push_back(random_subspace(d, p, rng));
  return out;
}

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("parameter validation follows the open bounds") {
  using E = Embedding;
  using F = Family;
  CHECK_THROWS_AS(KernelSpec::make(E::projection, F::polynomial, 2, 2, 0.0), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::make(E::projection, F::polynomial, 2, 1.5, 1.0), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::make(E::projection, F::polynomial, 2, 0, 1.0), InvalidKernelParameter);
  CHECK_NOTHROW(KernelSpec::make(E::projection, F::polynomial, 2, 3, 0.1));
  CHECK_THROWS_AS(KernelSpec::make(E::binet_cauchy, F::rbf, 2, 1, -1.0), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::make(E::binet_cauchy, F::laplace, 2, 1, 0.0), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::make(E::binet_cauchy, F::binomial, 2, 1, 1.0), InvalidKernelParameter);
  CHECK_NOTHROW(KernelSpec::make(E::binet_cauchy, F::binomial, 2, 0.5, 1.0001));
  CHECK_THROWS_AS(KernelSpec::make(E::projection, F::binomial, 3, 1, 3.0), InvalidKernelParameter);
  CHECK_NOTHROW(KernelSpec::make(E::projection, F::binomial, 3, 1, 3.5));
  CHECK_THROWS_AS(KernelSpec::make(E::projection, F::binomial, 3, 0.0, 4.0), InvalidKernelParameter);
  CHECK_NOTHROW(KernelSpec::make(E::projection, F::logarithm, 3));
}

TEST_CASE("records round trip") {
  for (const auto& k : kernel_catalog(3)) CHECK(KernelSpec::parse_record(k.to_record(), 3) == k);
  const auto k = KernelSpec::parse_record("family=rbf, embedding=projection, beta=0.5", 2);
  CHECK(k.name() == "rbf-projection");
  CHECK(k.beta() == 0.5);
  CHECK_THROWS_AS(KernelSpec::parse_record("family=rbf embedding=projection", 2), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::parse_record("family=rbf embedding=proj beta=1", 2), InvalidKernelParameter);
  CHECK_THROWS_AS(KernelSpec::parse_record("family=rbf embedding=projection gamma=1", 2), ParseError);
}

TEST_CASE("closed-form values") {
  Rng rng(1);
  const auto x = random_subspace(6, 3, rng);
  CHECK(evaluate(KernelSpec::make(Embedding::projection, Family::rbf, 3, 1, 1.0), x, x) ==
        doctest::Approx(std::exp(3.0)).epsilon(1e-12));
  CHECK(evaluate(KernelSpec::make(Embedding::binet_cauchy, Family::laplace, 3, 1, 2.0), x, x) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const auto log_p = evaluate(KernelSpec::make(Embedding::projection, Family::logarithm, 3), x, x);
  CHECK(std::abs(log_p) < 1e-12);

  const auto kp = KernelSpec::make(Embedding::projection, Family::baseline, 1);
  CHECK(evaluate(kp, line(0), line(pi / 3)) == doctest::Approx(0.25).epsilon(1e-14));

  const auto bi = KernelSpec::make(Embedding::projection, Family::binomial, 1, 1.0, 2.0);
  CHECK(evaluate(bi, line(0), line(pi / 2)) == doctest::Approx(0.5).epsilon(1e-14));
  const auto bi2 = KernelSpec::make(Embedding::projection, Family::binomial, 1, 2.5, 2.0);
  CHECK(evaluate(bi2, line(0), line(pi / 2)) == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-14));

  CHECK_THROWS_AS(evaluate(kp, x, x), DimensionMismatch);
}

TEST_CASE("laplace radicand is clamped at zero") {
  Rng rng(2);
  const auto x = random_subspace(10, 4, rng);
  for (auto e : {Embedding::binet_cauchy, Embedding::projection}) {
    const auto k = KernelSpec::make(e, Family::laplace, 4, 1, 3.0);
    const double v = evaluate(k, x, x.rebased(random_orthogonal(4, rng)));
    CHECK(std::isfinite(v));
    CHECK(v <= 1.0);
    CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("baseline and polynomial consistency") {
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const auto x = random_subspace(7, 3, rng);
    const auto y = random_subspace(7, 3, rng);
    const double lin_bc = evaluate(KernelSpec::make(Embedding::binet_cauchy, Family::linear, 3), x, y);
    const double base_bc = evaluate(KernelSpec::make(Embedding::binet_cauchy, Family::baseline, 3), x, y);
    CHECK(std::abs(base_bc - lin_bc * lin_bc) < 1e-12);
    // det(X^T Y Y^T X) route
    const Matrix xy = x.basis().transpose() * y.basis();
    CHECK(std::abs(base_bc - (xy * xy.transpose()).determinant()) < 1e-12);
    for (auto e : {Embedding::binet_cauchy, Embedding::projection}) {
      const double lin = evaluate(KernelSpec::make(e, Family::linear, 3), x, y);
      const double poly = evaluate(KernelSpec::make(e, Family::polynomial, 3, 1, 0.7), x, y);
      CHECK(std::abs(poly - (0.7 + lin)) < 1e-12);
    }
  }
}

TEST_CASE("every catalog kernel is symmetric and basis invariant") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const auto x = random_subspace(8, 2, rng);
    const auto y = random_subspace(8, 2, rng);
    const auto xr = x.rebased(random_orthogonal(2, rng));
    const auto yr = y.rebased(random_orthogonal(2, rng));
    for (const auto& k : kernel_catalog(2)) {
      const double v = evaluate(k, x, y);
      CHECK(close_rel(evaluate(k, y, x), v, 1e-13));
      CHECK(close_rel(evaluate(k, xr, yr), v, 1e-10));
    }
  }
}

TEST_CASE("kernels increase with the inner product") {
  for (const auto& k : kernel_catalog(3)) {
    const double top = k.embedding() == Embedding::binet_cauchy ? 1.0 : 3.0;
    double prev = k.from_inner(0.0);
    for (int i = 1; i <= 50; ++i) {
      const double v = k.from_inner(top * i / 50.0);
      CHECK_MESSAGE(v > prev, k.name());
      prev = v;
    }
  }
}

TEST_CASE("gram assembly") {
  Rng rng(5);
  const auto spec = KernelSpec::make(Embedding::projection, Family::rbf, 3, 1, 0.5);
  const auto x = random_subspace(10, 3, rng);
  std::vector<Subspace> one{x};
  const auto g1 = gram(spec, one);
  REQUIRE(g1.size() == 1);
  CHECK(g1.values(0, 0) == doctest::Approx(std::exp(1.5)));

  std::vector<Subspace> dup{x, x};
  const auto g2 = gram(spec, dup);
  const Vector ev = numerics::symmetric_eigenvalues(g2.values);
  CHECK(std::abs(ev(0)) < 1e-10 * ev(1));
  CHECK(ev(1) == doctest::Approx(2 * std::exp(1.5)));

  const auto data = random_set(10, 3, 50, rng);
  const auto g = gram(spec, data);
  CHECK((g.values - g.values.transpose()).norm() == 0.0);
  for (Eigen::Index i = 0; i < 50; ++i) CHECK(close_rel(g.values(i, i), std::exp(0.5 * 3), 1e-10));
  const Vector e = numerics::symmetric_eigenvalues(g.values);
  CHECK(e(0) >= -1e-8 * e(49));
  CHECK(g.dataset_fingerprint == fingerprint(data));

  const auto g8 = gram(spec, data, 8);
  CHECK(std::memcmp(g8.values.data(), g.values.data(), sizeof(double) * 2500) == 0);
}

TEST_CASE("certification") {
  const auto id = certify_pd(Matrix::Identity(4, 4), Definiteness::pd);
  CHECK(id.passed);
  CHECK(id.min_eigenvalue == doctest::Approx(1.0));

  Matrix neg = Matrix::Identity(2, 2);
  neg(0, 1) = neg(1, 0) = 2.0;
  CHECK_FALSE(certify_pd(neg, Definiteness::pd).passed);
  // -||xi - xj||^2 on the real line is cpd but not pd
  Matrix dist(3, 3);
  const double pts[] = {0.0, 1.0, 3.0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) dist(i, j) = -(pts[i] - pts[j]) * (pts[i] - pts[j]);
  CHECK_FALSE(certify_pd(dist, Definiteness::pd).passed);
  CHECK(certify_pd(dist, Definiteness::cpd).passed);

  Rng rng(6);
  const auto data = random_set(10, 3, 50, rng);
  const auto logp = gram(KernelSpec::make(Embedding::projection, Family::logarithm, 3), data);
  CHECK(certify_pd(logp, Definiteness::cpd).passed);
}

TEST_CASE("projection-side table kernels certify on random data") {
  Rng rng(7);
  for (auto [d, p] : {std::pair<Eigen::Index, Eigen::Index>{8, 2}, {10, 3}}) {
    const auto data = random_set(d, p, 60, rng);
    for (const auto& k : table_kernels(p)) {
      if (k.embedding() != Embedding::projection) continue;
      const auto rep = certify_pd(gram(k, data), k.definiteness());
      CHECK_MESSAGE(rep.passed, k.name(), " min=", rep.min_eigenvalue, " max=", rep.max_eigenvalue);
    }
  }
}

TEST_CASE("geodesic pseudo-kernel and the counter-example") {
  CHECK(geodesic_rbf_pseudo_kernel(1.0, line(0.4), line(0.4)) == doctest::Approx(1.0));
  CHECK(geodesic_rbf_pseudo_kernel(1.0, line(0), line(pi / 2)) == doctest::Approx(std::exp(-pi * pi / 4)));
  CHECK_THROWS_AS(geodesic_rbf_pseudo_kernel(0.0, line(0), line(1)), InvalidKernelParameter);

  const auto pts = counterexample_points();
  REQUIRE(pts.size() == 4);
  Matrix k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = geodesic_rbf_pseudo_kernel(1.0, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
  const auto rep = certify_pd(k, Definiteness::pd);
  CHECK_FALSE(rep.passed);
  CHECK(std::abs(rep.min_eigenvalue + 0.0038) <= 5e-4);
}
