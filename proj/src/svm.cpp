#include "grasskern/machines/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "grasskern/error.hpp"

namespace grasskern::machines {

namespace {

constexpr double kTau = 1e-12;

struct Problem {
  const Matrix& k;
  std::span<const int> y;
  double C;
  double shift;

  double kij(Eigen::Index i, Eigen::Index j) const { return k(i, j) + shift; }
  double q(Eigen::Index i, Eigen::Index j) const { return y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)] * kij(i, j); }
};

bool in_up(double a, int y, double C) { return (y == +1 && a < C) || (y == -1 && a > 0.0); }
bool in_low(double a, int y, double C) { return (y == +1 && a > 0.0) || (y == -1 && a < C); }

}  // namespace

SvmModel svm_train(const GramMatrix& gram, std::span<const int> labels, double C, std::span<const Subspace> refs,
                   const SvmOptions& options) {
  const Eigen::Index n = gram.size();
  if (static_cast<std::size_t>(n) != labels.size())
    throw DimensionMismatch("svm_train: " + std::to_string(labels.size()) + " labels for a " + std::to_string(n) +
                            "-point Gram");
  if (!refs.empty() && refs.size() != labels.size())
    throw DimensionMismatch("svm_train: reference count does not match the Gram");
  if (!(C > 0.0) || !std::isfinite(C)) throw InvalidKernelParameter("svm_train: C must be positive");
  bool pos = false, neg = false;
  for (int v : labels) {
    if (v == 1) pos = true;
    else if (v == -1) neg = true;
    else throw DegenerateLabels("svm_train: labels must be +1 or -1, got " + std::to_string(v));
  }
  if (!pos || !neg) throw DegenerateLabels("svm_train: both classes must be present");
  numerics::require_finite(gram.values);

  const Problem pr{gram.values, labels, C, options.kernel_shift};
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(n), -1.0);  // Q alpha - 1
  const auto y = [&](Eigen::Index i) { return labels[static_cast<std::size_t>(i)]; };

  SvmModel model{.spec = gram.spec};
  model.C = C;
  double gap = 0.0;
  std::size_t iter = 0;
  for (;; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      const auto ts = static_cast<std::size_t>(t);
      const double v = -y(t) * grad[ts];
      if (in_up(alpha[ts], y(t), C) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(alpha[ts], y(t), C) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    gap = (i < 0 || j < 0) ? 0.0 : gmax - gmin;
    if (gap <= options.kkt_tolerance) {
      model.converged = true;
      break;
    }
    if (iter >= options.max_iterations) break;

    const auto is = static_cast<std::size_t>(i), js = static_cast<std::size_t>(j);
    const double old_ai = alpha[is], old_aj = alpha[js];
    double quad = pr.kij(i, i) + pr.kij(j, j) - 2.0 * pr.kij(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y(i) != y(j)) {
      const double delta = (-grad[is] - grad[js]) / quad;
      const double diff = alpha[is] - alpha[js];
      alpha[is] += delta;
      alpha[js] += delta;
      if (diff > 0.0) {
        if (alpha[js] < 0.0) {
          alpha[js] = 0.0;
          alpha[is] = diff;
        }
      } else if (alpha[is] < 0.0) {
        alpha[is] = 0.0;
        alpha[js] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[is] > C) {
          alpha[is] = C;
          alpha[js] = C - diff;
        }
      } else if (alpha[js] > C) {
        alpha[js] = C;
        alpha[is] = C + diff;
      }
    } else {
      const double delta = (grad[is] - grad[js]) / quad;
      const double sum = alpha[is] + alpha[js];
      alpha[is] -= delta;
      alpha[js] += delta;
      if (sum > C) {
        if (alpha[is] > C) {
          alpha[is] = C;
          alpha[js] = sum - C;
        }
      } else if (alpha[js] < 0.0) {
        alpha[js] = 0.0;
        alpha[is] = sum;
      }
      if (sum > C) {
        if (alpha[js] > C) {
          alpha[js] = C;
          alpha[is] = sum - C;
        }
      } else if (alpha[is] < 0.0) {
        alpha[is] = 0.0;
        alpha[js] = sum;
      }
    }
    const double dai = alpha[is] - old_ai, daj = alpha[js] - old_aj;
    for (Eigen::Index t = 0; t < n; ++t) grad[static_cast<std::size_t>(t)] += pr.q(t, i) * dai + pr.q(t, j) * daj;
  }

  // rho as in the usual decomposition solvers: mean over free vectors,
  // midpoint of the feasible interval otherwise
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const double yg = y(t) * grad[ts];
    if (alpha[ts] >= C) {
      if (y(t) == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (alpha[ts] <= 0.0) {
      if (y(t) == +1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++free_count;
      free_sum += yg;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (ub + lb) / 2.0;
  model.bias = -rho;

  double dual = 0.0, quad_term = 0.0, hinge = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    dual += alpha[ts];
    quad_term += alpha[ts] * (grad[ts] + 1.0);
    hinge += std::max(0.0, -grad[ts] - y(t) * model.bias);
  }
  dual -= 0.5 * quad_term;
  model.duality_gap = 0.5 * quad_term + C * hinge - dual;
  model.kkt_residual = gap;
  model.iterations = iter;
  model.kernel_shift = options.kernel_shift;

  for (Eigen::Index t = 0; t < n; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    if (alpha[ts] > 0.0) {
      model.support_indices.push_back(static_cast<int>(t));
      model.dual_coefficients.push_back(alpha[ts] * y(t));
      if (!refs.empty()) model.training_refs.push_back(refs[ts]);
    }
  }
  model.alphas = std::move(alpha);
  return model;
}

namespace {

SvmPrediction decide(double v) { return {v >= 0.0 ? +1 : -1, v}; }

}  // namespace

SvmPrediction svm_predict(const SvmModel& model, const Subspace& query) {
  if (model.training_refs.size() != model.support_indices.size())
    throw DimensionMismatch("svm_predict: model carries no support-vector subspaces");
  double v = model.bias;
  for (std::size_t s = 0; s < model.training_refs.size(); ++s) {
    const auto& ref = model.training_refs[s];
    if (ref.ambient_dim() != query.ambient_dim() || ref.dim() != query.dim())
      throw DimensionMismatch("svm_predict: query is G(" + std::to_string(query.dim()) + "," +
                              std::to_string(query.ambient_dim()) + "), model is G(" + std::to_string(ref.dim()) +
                              "," + std::to_string(ref.ambient_dim()) + ")");
    v += model.dual_coefficients[s] * (evaluate(model.spec, query, ref) + model.kernel_shift);
  }
  return decide(v);
}

SvmPrediction svm_predict_from_row(const SvmModel& model, const Vector& row) {
  double v = model.bias;
  for (std::size_t s = 0; s < model.support_indices.size(); ++s) {
    const auto idx = model.support_indices[s];
    if (idx >= row.size()) throw DimensionMismatch("svm_predict_from_row: kernel row is too short");
    v += model.dual_coefficients[s] * (row(idx) + model.kernel_shift);
  }
  return decide(v);
}

}  // namespace grasskern::machines
