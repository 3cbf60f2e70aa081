#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include <json.hpp>

#include "grasskern/harness/experiment.hpp"
#include "grasskern/machines/kkmeans.hpp"
#include "grasskern/machines/klsh.hpp"
#include "grasskern/machines/sparse_coding.hpp"
#include "grasskern/machines/svm.hpp"
#include "grasskern/sampling.hpp"
#include "oracles.hpp"

using namespace grasskern;
namespace m = grasskern::machines;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ------------------------------------------------------------------ 1

Outcome counterexample() {
  const auto pts = counterexample_points();
  Matrix k(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      k(i, j) = geodesic_rbf_pseudo_kernel(1.0, pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
  const auto roots = oracle::charpoly_roots(k);
  const double lo = *std::min_element(roots.begin(), roots.end());
  const double ev = numerics::symmetric_eigenvalues(k)(0);
  return {std::abs(ev + 0.0038) <= 5e-4 && std::abs(lo - ev) <= 1e-9,
          "min eigenvalue " + num(ev) + " (char. polynomial " + num(lo) + ")"};
}

// ------------------------------------------------------------------ 2

std::vector<KernelSpec> sampled_settings(Embedding e, Family f, Eigen::Index p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<KernelSpec> out;
  const double floor = e == Embedding::projection ? static_cast<double>(p) : 1.0;
  for (int s = 0; s < 5; ++s) {
    switch (f) {
      case Family::polynomial: out.push_back(KernelSpec::make(e, f, p, 1.0 + static_cast<double>(rng() % 4), 0.1 + 2.9 * u(rng))); break;
      case Family::rbf:
      case Family::laplace: out.push_back(KernelSpec::make(e, f, p, 1.0, 0.1 + 1.9 * u(rng))); break;
      case Family::binomial: out.push_back(KernelSpec::make(e, f, p, 0.5 + 2.5 * u(rng), floor + 0.05 + 3.0 * u(rng))); break;
      default: out.push_back(KernelSpec::make(e, f, p)); break;
    }
  }
  return out;
}

Outcome pd_sweep() {
  Rng rng(2024);
  int checked = 0, failed = 0;
  std::map<std::string, int> failing;
  for (const auto [d, p] : {std::pair<Eigen::Index, Eigen::Index>{8, 2}, {10, 3}}) {
    std::vector<Subspace> x;
    for (int i = 0; i < 100; ++i) x.push_back(random_subspace(d, p, rng));
    for (auto e : {Embedding::binet_cauchy, Embedding::projection})
      for (auto f : {Family::polynomial, Family::rbf, Family::laplace, Family::binomial, Family::logarithm})
        for (const auto& spec : sampled_settings(e, f, p, rng)) {
          ++checked;
          if (!certify_pd(gram(spec, x), spec.definiteness()).passed) {
            ++failed;
            ++failing[spec.name()];
          }
        }
  }
  std::string detail = std::to_string(checked - failed) + "/" + std::to_string(checked) + " settings certified";
  for (const auto& [name, count] : failing) detail += ", " + name + " fails " + std::to_string(count);
  return {failed == 0, detail};
}

// ------------------------------------------------------------------ 3

double minor_inner(const Subspace& x, const Subspace& y) {
  const int d = static_cast<int>(x.ambient_dim()), p = static_cast<int>(x.dim());
  double s = 0.0;
  for (const auto& rows : index_subsets(d, p)) {
    Matrix a(p, p), b(p, p);
    for (int r = 0; r < p; ++r) {
      a.row(r) = x.basis().row(rows[static_cast<std::size_t>(r)]);
      b.row(r) = y.basis().row(rows[static_cast<std::size_t>(r)]);
    }
    s += oracle::cofactor_det(a) * oracle::cofactor_det(b);
  }
  return std::abs(s);
}

Outcome plucker() {
  Rng rng(3);
  double worst = 0.0, worst_c = 0.0;
  const std::pair<Eigen::Index, Eigen::Index> shapes[] = {{4, 2}, {6, 2}, {6, 3}};
  for (int t = 0; t < 1000; ++t) {
    const auto [d, p] = shapes[t % 3];
    const auto x = random_subspace(d, p, rng), y = random_subspace(d, p, rng);
    worst = std::max(worst, std::abs(minor_inner(x, y) - std::abs(numerics::determinant(x.basis().transpose() * y.basis()))));
    worst = std::max(worst, std::abs(std::abs(plucker_embed(x).coords.dot(plucker_embed(y).coords)) - bc_inner(x, y)));
  }
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index rows = 4 + t % 3, ca = 2 + t % 3, cb = 3 + t % 2;
    const int q = 1 + t % 2;
    const Matrix a = gaussian_matrix(rows, ca, rng), b = gaussian_matrix(rows, cb, rng);
    const Matrix lhs = compound_matrix(a.transpose() * b, q);
    const Matrix rhs = compound_matrix(a, q).transpose() * compound_matrix(b, q);
    for (Eigen::Index i = 0; i < lhs.size(); ++i)
      worst_c = std::max(worst_c, std::abs(lhs(i) - rhs(i)) / std::max(1.0, std::abs(rhs(i))));
  }
  return {worst <= 1e-10 && worst_c <= 1e-10, "max minor error " + num(worst) + ", compound " + num(worst_c)};
}

// ------------------------------------------------------------------ 4

Outcome property_one() {
  Rng rng(4);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index p = 1 + t % 3, d = p + 2 + t % 5;
    const auto x = random_subspace(d, p, rng), y = random_subspace(d, p, rng);
    const Matrix o = x.basis().transpose() * y.basis();
    const auto cos2 = oracle::charpoly_roots(o.transpose() * o);
    const double sum = std::accumulate(cos2.begin(), cos2.end(), 0.0);
    const double prod = std::accumulate(cos2.begin(), cos2.end(), 1.0, std::multiplies<>());
    const auto th = principal_angles(x, y).angles;
    double sum_th = 0.0, prod_th = 1.0;
    for (double a : th) {
      sum_th += std::cos(a) * std::cos(a);
      prod_th *= std::cos(a) * std::cos(a);
    }
    const double bc = bc_inner(x, y);
    worst = std::max({worst, std::abs(proj_inner(x, y) - sum), std::abs(bc * bc - prod), std::abs(proj_inner(x, y) - sum_th),
                      std::abs(bc * bc - prod_th)});
  }
  return {worst <= 1e-10, "max identity error " + num(worst)};
}

// ------------------------------------------------------------------ 5

Outcome curve_limit() {
  Rng rng(5);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  double worst = 0.0, seen_lo = 1e9, seen_hi = -1e9;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index p = 2 + t % 2, d = 2 * p + 2;
    const Matrix q = random_orthogonal(d, rng);
    Vector th(p);
    for (Eigen::Index i = 0; i < p; ++i) th(i) = u(rng);
    th *= (1e-3 * u(rng)) / th.norm();
    Matrix yb(d, p);
    for (Eigen::Index i = 0; i < p; ++i) yb.col(i) = std::cos(th(i)) * q.col(i) + std::sin(th(i)) * q.col(p + i);
    const Subspace x(q.leftCols(p)), y(yb);
    const double r = curve_length_ratio(x, y);
    seen_lo = std::min(seen_lo, r);
    seen_hi = std::max(seen_hi, r);
    worst = std::max(worst, std::abs(r - 2.0));
  }
  return {worst <= 1e-4, "ratio in [" + num(seen_lo) + ", " + num(seen_hi) + "], max |ratio - 2| " + num(worst)};
}

// ------------------------------------------------------------------ 6

Outcome basis_invariance() {
  Rng rng(6);
  double worst = 0.0;
  int evaluations = 0;
  for (int t = 0; t < 500; ++t) {
    const Eigen::Index p = 1 + t % 3, d = p + 3;
    const auto x = random_subspace(d, p, rng), y = random_subspace(d, p, rng);
    const auto xr = x.rebased(random_orthogonal(p, rng));
    const auto yr = y.rebased(random_orthogonal(p, rng));
    for (const auto& spec : kernel_catalog(p)) {
      const double v = evaluate(spec, x, y);
      for (double w : {evaluate(spec, xr, y), evaluate(spec, x, yr), evaluate(spec, xr, yr)}) {
        worst = std::max(worst, std::abs(w - v) / std::max(1.0, std::abs(v)));
        ++evaluations;
      }
    }
  }
  return {worst <= 1e-10, std::to_string(evaluations) + " comparisons, max relative change " + num(worst)};
}

// ------------------------------------------------------------------ 7

harness::ExperimentConfig planted_task(const std::string& task, int classes, const std::string& kernel) {
  harness::ExperimentConfig c;
  c.task = task;
  c.seed = 7;
  c.classes = classes;
  c.per_class = 20;
  c.noise_angle = 0.1;
  c.orthogonal = true;
  c.splits = 10;
  c.restarts = 5;
  c.kernels = {kernel};
  return c;
}

double mean_metric(const harness::ExperimentConfig& c, const char* key) {
  const auto doc = json::parse(harness::run_experiment(c).document);
  const auto& row = doc["results"][0];
  if (row.contains("error")) return -1.0;
  return row[key].get<double>();
}

double klsh_recall() {
  harness::PlantedOptions o;
  o.d = 100;
  o.p = 2;
  o.classes = 50;
  o.per_class = 10;
  o.noise_angle = 0.1;
  o.seed = 17;
  o.orthogonal_prototypes = true;
  const auto data = harness::generate_planted(o);
  const auto spec = KernelSpec::make(Embedding::projection, Family::rbf, 2, 1, 1.0);
  const auto g = gram(spec, data.subspaces);
  const auto fam = m::klsh_build(g, 60, m::kDefaultAnchors, 19);
  const auto keys = m::klsh_hash_training(fam, g);
  const auto n = static_cast<int>(data.size());
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    std::vector<int> others;
    for (int j = 0; j < n; ++j)
      if (j != i) others.push_back(j);
    auto exact = others;
    const auto dist = [&](int j) { return g.values(i, i) + g.values(j, j) - 2 * g.values(i, j); };
    std::stable_sort(exact.begin(), exact.end(), [&](int a, int b) { return dist(a) < dist(b); });
    auto approx = others;
    std::stable_sort(approx.begin(), approx.end(), [&](int a, int b) {
      return m::hamming(keys[static_cast<std::size_t>(i)], keys[static_cast<std::size_t>(a)]) <
             m::hamming(keys[static_cast<std::size_t>(i)], keys[static_cast<std::size_t>(b)]);
    });
    std::vector<int> e10(exact.begin(), exact.begin() + 10), a10(approx.begin(), approx.begin() + 10);
    std::sort(e10.begin(), e10.end());
    std::sort(a10.begin(), a10.end());
    std::vector<int> common;
    std::set_intersection(e10.begin(), e10.end(), a10.begin(), a10.end(), std::back_inserter(common));
    total += static_cast<double>(common.size()) / 10.0;
  }
  return total / n;
}

Outcome planted_machines() {
  const std::string rbf = "embedding=projection family=rbf beta=1";
  const double svm = mean_metric(planted_task("svm", 2, rbf), "mean_accuracy");
  const double km = mean_metric(planted_task("cluster", 5, rbf), "mean_nmi");
  auto sc_cfg = planted_task("sparse-code", 3, rbf);
  const double sc = mean_metric(sc_cfg, "mean_accuracy");
  const double recall = klsh_recall();
  return {svm >= 0.95 && km >= 0.9 && sc >= 0.9 && recall >= 0.5,
          "svm " + num(svm) + ", kkmeans nmi " + num(km) + ", sparse coding " + num(sc) + ", klsh recall@10 " + num(recall)};
}

// ------------------------------------------------------------------ 8

Outcome cpd_shift() {
  harness::PlantedOptions o;
  o.classes = 2;
  o.per_class = 20;
  o.noise_angle = 0.4;
  o.seed = 8;
  o.orthogonal_prototypes = true;
  const auto data = harness::generate_planted(o);
  std::vector<int> y;
  for (int l : data.labels) y.push_back(l == 0 ? 1 : -1);
  int mismatches = 0, total = 0;
  for (auto e : {Embedding::binet_cauchy, Embedding::projection}) {
    const auto spec = KernelSpec::make(e, Family::logarithm, 2);
    const auto g = gram(spec, data.subspaces);
    const auto base = m::svm_train(g, y, 1.0);
    for (double c : {1.0, 10.0}) {
      GramMatrix gs = g;
      gs.values.array() += c;
      const auto shifted = m::svm_train(gs, y, 1.0);
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        ++total;
        mismatches += m::svm_predict_from_row(base, g.values.row(i).transpose()).label !=
                      m::svm_predict_from_row(shifted, gs.values.row(i).transpose()).label;
      }
    }
  }
  return {mismatches == 0, std::to_string(total - mismatches) + "/" + std::to_string(total) + " training signs agree"};
}

// ------------------------------------------------------------------ 9

Outcome solver_invariants() {
  double worst_kkt = 0.0;
  bool all_converged = true;
  const auto rbf = KernelSpec::make(Embedding::projection, Family::rbf, 2, 1, 1.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    harness::PlantedOptions o;
    o.classes = 2;
    o.per_class = 20;
    o.noise_angle = 0.1 + 0.2 * static_cast<double>(s);
    o.seed = 90 + s;
    o.orthogonal_prototypes = true;
    const auto data = harness::generate_planted(o);
    std::vector<int> y;
    for (int l : data.labels) y.push_back(l == 0 ? 1 : -1);
    const auto model = m::svm_train(gram(rbf, data.subspaces), y, 1.0);
    all_converged = all_converged && model.converged;
    worst_kkt = std::max(worst_kkt, model.kkt_residual);
  }

  int runs = 0, increases = 0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    harness::PlantedOptions o;
    o.classes = 4;
    o.per_class = 15;
    o.noise_angle = 0.5;
    o.seed = 70 + s;
    o.orthogonal_prototypes = true;
    const auto data = harness::generate_planted(o);
    for (const auto& r : m::kkmeans_all_restarts(gram(rbf, data.subspaces), 4, s, 10)) {
      ++runs;
      for (std::size_t t = 1; t < r.inertia_history.size(); ++t) increases += r.inertia_history[t] > r.inertia_history[t - 1];
    }
  }

  Rng rng(9);
  std::uniform_real_distribution<double> lam(0.01, 2.0);
  double worst_gap = 0.0;
  int sc_increases = 0;
  for (int t = 0; t < 20; ++t) {
    const Matrix a = gaussian_matrix(8, 6, rng);
    const Matrix K = a.transpose() * a;
    const Vector x = gaussian_matrix(8, 1, rng).col(0);
    const Vector k = a.transpose() * x;
    const double lambda = lam(rng);
    const auto code = m::kernel_sparse_code(K, k, x.squaredNorm(), lambda);
    for (std::size_t s = 1; s < code.objective_history.size(); ++s)
      sc_increases += code.objective_history[s] > code.objective_history[s - 1];
    worst_gap = std::max(worst_gap, std::abs(m::sparse_objective(K, k, x.squaredNorm(), lambda, code.coefficients) -
                                            oracle::lasso_enumerate(K, k, x.squaredNorm(), lambda)));
  }
  return {all_converged && worst_kkt <= 1e-6 && increases == 0 && sc_increases == 0 && worst_gap <= 1e-6,
          "svm kkt " + num(worst_kkt) + (all_converged ? "" : " (not converged)") + ", kkmeans increases " +
              std::to_string(increases) + " over " + std::to_string(runs) + " runs, sparse increases " +
              std::to_string(sc_increases) + ", oracle gap " + num(worst_gap)};
}

// ------------------------------------------------------------------ 10

Outcome determinism() {
  harness::ExperimentConfig c;
  c.task = "bench";
  c.seed = 10;
  c.threads = 1;
  const auto a = harness::run_experiment(c);
  const auto b = harness::run_experiment(c);
  c.threads = 8;
  const auto p = harness::run_experiment(c);
  const bool same = a.document == b.document && a.document == p.document && a.table == b.table && a.table == p.table;
  return {same, std::to_string(a.document.size()) + " byte report, 1/1/8 threads " + (same ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
    double limit_seconds;
  };
  const Criterion criteria[] = {
      {1, "counterexample eigenvalue", counterexample, 1.0},
      {2, "pd certification sweep", pd_sweep, 60.0},
      {3, "plucker minors and compound identity", plucker, 0.0},
      {4, "principal angle identities", property_one, 0.0},
      {5, "curve-length limit", curve_limit, 0.0},
      {6, "basis invariance", basis_invariance, 0.0},
      {7, "machines on planted data", planted_machines, 300.0},
      {8, "cpd shift invariance", cpd_shift, 0.0},
      {9, "solver invariants", solver_invariants, 0.0},
      {10, "bench determinism", determinism, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds) {
      out.pass = false;
      out.detail += "; over the " + num(c.limit_seconds) + " s budget";
    }
    failures += !out.pass;
    std::printf("%s criterion %d (%s): %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
