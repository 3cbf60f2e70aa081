#include "grasskern/kernels.hpp"

#include <cmath>
#include <map>

#include "grasskern/error.hpp"
#include "grasskern/format.hpp"
#include "grasskern/parallel.hpp"

namespace grasskern {

std::string_view to_string(Embedding e) { return e == Embedding::binet_cauchy ? "binet_cauchy" : "projection"; }

std::string_view to_string(Family f) {
  switch (f) {
    case Family::baseline: return "baseline";
    case Family::linear: return "linear";
    case Family::polynomial: return "polynomial";
    case Family::rbf: return "rbf";
    case Family::laplace: return "laplace";
    case Family::binomial: return "binomial";
    case Family::logarithm: return "logarithm";
  }
  return "?";
}

std::string_view to_string(Definiteness m) { return m == Definiteness::pd ? "pd" : "cpd"; }

Embedding parse_embedding(std::string_view s) {
  if (s == "binet_cauchy" || s == "bc") return Embedding::binet_cauchy;
  if (s == "projection" || s == "p") return Embedding::projection;
  throw InvalidKernelParameter("unknown embedding '" + std::string(s) + "'");
}

Family parse_family(std::string_view s) {
  for (auto f : {Family::baseline, Family::linear, Family::polynomial, Family::rbf, Family::laplace,
                 Family::binomial, Family::logarithm})
    if (s == to_string(f)) return f;
  throw InvalidKernelParameter("unknown kernel family '" + std::string(s) + "'");
}

KernelSpec KernelSpec::make(Embedding e, Family f, Eigen::Index p, double alpha, double beta) {
  const auto fail = [&](const std::string& why) {
    throw InvalidKernelParameter(std::string(to_string(f)) + "-" + std::string(to_string(e)) + ": " + why);
  };
  if (p <= 0) fail("subspace dimension must be positive");
  if (!std::isfinite(alpha) || !std::isfinite(beta)) fail("parameters must be finite");
  switch (f) {
    case Family::baseline:
    case Family::linear:
    case Family::logarithm:
      alpha = 1.0;
      beta = 0.0;
      break;
    case Family::polynomial:
      if (!(beta > 0.0)) fail("requires beta > 0");
      if (!(alpha >= 1.0) || alpha != std::floor(alpha)) fail("requires integer alpha >= 1");
      break;
    case Family::rbf:
    case Family::laplace:
      if (!(beta > 0.0)) fail("requires beta > 0");
      alpha = 1.0;
      break;
    case Family::binomial: {
      const double bound = e == Embedding::binet_cauchy ? 1.0 : static_cast<double>(p);
      if (!(beta > bound)) fail("requires beta > " + format_shortest(bound));
      if (!(alpha > 0.0)) fail("requires alpha > 0");
      break;
    }
  }
  return KernelSpec(e, f, p, alpha, beta);
}

KernelSpec KernelSpec::parse_record(std::string_view record, Eigen::Index p) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t pos = 0;
  while (pos < record.size()) {
    const auto end = record.find_first_of(" ,\t", pos);
    const auto tok = trim(record.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
    pos = end == std::string_view::npos ? record.size() : end + 1;
    if (tok.empty()) continue;
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos) throw ParseError("kernel record token '" + std::string(tok) + "' lacks '='");
    const auto key = std::string(trim(tok.substr(0, eq)));
    if (key != "embedding" && key != "family" && key != "alpha" && key != "beta")
      throw ParseError("unknown kernel record key '" + key + "'");
    kv[key] = std::string(trim(tok.substr(eq + 1)));
  }
  if (!kv.contains("embedding") || !kv.contains("family"))
    throw ParseError("kernel record needs embedding= and family=");
  const auto e = parse_embedding(kv["embedding"]);
  const auto f = parse_family(kv["family"]);
  double alpha = 1.0;
  double beta = 0.0;
  if (kv.contains("alpha") && !parse_double(kv["alpha"], alpha)) throw ParseError("bad alpha '" + kv["alpha"] + "'");
  if (kv.contains("beta") && !parse_double(kv["beta"], beta)) throw ParseError("bad beta '" + kv["beta"] + "'");
  const bool needs_beta = f == Family::polynomial || f == Family::rbf || f == Family::laplace || f == Family::binomial;
  if (needs_beta && !kv.contains("beta"))
    throw InvalidKernelParameter("kernel record for " + std::string(to_string(f)) + " needs beta=");
  return make(e, f, p, alpha, beta);
}

std::string KernelSpec::name() const {
  return std::string(to_string(family_)) + "-" + std::string(to_string(embedding_));
}

std::string KernelSpec::to_record() const {
  return "embedding=" + std::string(to_string(embedding_)) + " family=" + std::string(to_string(family_)) +
         " alpha=" + format_shortest(alpha_) + " beta=" + format_shortest(beta_);
}

double KernelSpec::from_inner(double inner) const {
  const bool bc = embedding_ == Embedding::binet_cauchy;
  const double top = bc ? 1.0 : static_cast<double>(p_);  // inner product of a point with itself
  switch (family_) {
    case Family::baseline: return bc ? inner * inner : inner;
    case Family::linear: return inner;
    case Family::polynomial: return std::pow(beta_ + inner, alpha_);
    case Family::rbf: return std::exp(beta_ * inner);
    case Family::laplace: return std::exp(-beta_ * std::sqrt(std::max(0.0, top - inner)));
    case Family::binomial: return std::pow(beta_ - inner, -alpha_);
    case Family::logarithm: return -std::log(top + 1.0 - inner);
  }
  return 0.0;
}

std::vector<KernelSpec> table_kernels(Eigen::Index p) {
  std::vector<KernelSpec> out;
  for (auto e : {Embedding::binet_cauchy, Embedding::projection}) {
    out.push_back(KernelSpec::make(e, Family::polynomial, p, 2.0, 1.0));
    out.push_back(KernelSpec::make(e, Family::rbf, p, 1.0, 1.0));
    out.push_back(KernelSpec::make(e, Family::laplace, p, 1.0, 1.0));
    out.push_back(KernelSpec::make(e, Family::binomial, p, 1.0,
                                   e == Embedding::binet_cauchy ? 2.0 : static_cast<double>(p) + 1.0));
    out.push_back(KernelSpec::make(e, Family::logarithm, p));
  }
  return out;
}

std::vector<KernelSpec> kernel_catalog(Eigen::Index p) {
  std::vector<KernelSpec> out;
  for (auto e : {Embedding::binet_cauchy, Embedding::projection}) {
    out.push_back(KernelSpec::make(e, Family::baseline, p));
    out.push_back(KernelSpec::make(e, Family::linear, p));
  }
  for (auto& k : table_kernels(p)) out.push_back(k);
  return out;
}

double inner_product(Embedding e, const Subspace& x, const Subspace& y) {
  return e == Embedding::binet_cauchy ? bc_inner(x, y) : proj_inner(x, y);
}

double evaluate(const KernelSpec& spec, const Subspace& x, const Subspace& y) {
  if (x.dim() != spec.subspace_dim())
    throw DimensionMismatch("kernel " + spec.name() + " expects p=" + std::to_string(spec.subspace_dim()) +
                            ", got p=" + std::to_string(x.dim()));
  if (spec.family() == Family::laplace) {
    const double radicand = spec.embedding() == Embedding::binet_cauchy ? bc_complement(x, y) : proj_complement(x, y);
    return std::exp(-spec.beta() * std::sqrt(std::max(0.0, radicand)));
  }
  return spec.from_inner(inner_product(spec.embedding(), x, y));
}

double geodesic_rbf_pseudo_kernel(double beta, const Subspace& x, const Subspace& y) {
  if (!(beta > 0.0)) throw InvalidKernelParameter("geodesic pseudo-kernel requires beta > 0");
  const double g = geodesic_distance(x, y);
  return std::exp(-beta * g * g);
}

GramMatrix gram(const KernelSpec& spec, std::span<const Subspace> data, unsigned threads,
                std::string fingerprint_override) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Matrix k(n, n);
  parallel_for(data.size(), threads, [&](std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = ii; j < n; ++j) k(ii, j) = evaluate(spec, data[i], data[static_cast<std::size_t>(j)]);
  });
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) k(i, j) = k(j, i);
  return {std::move(k), spec, fingerprint_override.empty() ? fingerprint(data) : std::move(fingerprint_override)};
}

Vector kernel_row(const KernelSpec& spec, std::span<const Subspace> refs, const Subspace& query) {
  Vector row(static_cast<Eigen::Index>(refs.size()));
  for (std::size_t i = 0; i < refs.size(); ++i) row(static_cast<Eigen::Index>(i)) = evaluate(spec, query, refs[i]);
  return row;
}

CertificationReport certify_pd(const Matrix& gram, Definiteness mode, double tol) {
  Matrix target = gram;
  if (mode == Definiteness::cpd) {
    const auto n = gram.rows();
    const Matrix j = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
    target = j * gram * j;
  }
  const Vector ev = numerics::symmetric_eigenvalues(target);
  CertificationReport r{mode, ev.size() ? ev(0) : 0.0, ev.size() ? ev(ev.size() - 1) : 0.0, tol, true};
  const double scale = r.max_eigenvalue > 0.0 ? r.max_eigenvalue : ev.cwiseAbs().maxCoeff();
  r.passed = r.min_eigenvalue >= -tol * scale;
  return r;
}

std::vector<Subspace> counterexample_points() {
  const double raw[4][3][2] = {
      {{1, 0}, {0, 1}, {0, 0}},
      {{-0.0996, -0.3085}, {-0.4967, -0.8084}, {-0.8622, 0.5014}},
      {{-0.9868, 0.1259}, {-0.1221, -0.9916}, {-0.1065, -0.0293}},
      {{0.1736, 0.0835}, {0.7116, 0.6782}, {0.6808, -0.7301}},
  };
  std::vector<Subspace> out;
  for (const auto& pt : raw) {
    Matrix m(3, 2);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 2; ++j) m(i, j) = pt[i][j];
    out.push_back(Subspace::from_span(m));
  }
  return out;
}

}  // namespace grasskern
