#include "grasskern/machines/kkmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "grasskern/error.hpp"
#include "grasskern/parallel.hpp"
#include "grasskern/sampling.hpp"

namespace grasskern::machines {

namespace {

// Distances of every point to every current centroid (n x k).
Matrix centroid_distances(const Matrix& K, const std::vector<int>& labels, int k) {
  const Eigen::Index n = K.rows();
  std::vector<double> size(static_cast<std::size_t>(k), 0.0);
  for (int l : labels) size[static_cast<std::size_t>(l)] += 1.0;
  Matrix sums = Matrix::Zero(n, k);
  for (Eigen::Index j = 0; j < n; ++j) sums.col(labels[static_cast<std::size_t>(j)]) += K.col(j);
  std::vector<double> self(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) self[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] +=
      sums(j, labels[static_cast<std::size_t>(j)]);
  Matrix dist(n, k);
  for (int c = 0; c < k; ++c) {
    const double m = size[static_cast<std::size_t>(c)];
    for (Eigen::Index i = 0; i < n; ++i)
      dist(i, c) = m > 0 ? K(i, i) - 2.0 * sums(i, c) / m + self[static_cast<std::size_t>(c)] / (m * m)
                         : std::numeric_limits<double>::infinity();
  }
  return dist;
}

double total_inertia(const Matrix& dist, const std::vector<int>& labels) {
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) s += dist(static_cast<Eigen::Index>(i), labels[i]);
  return s;
}

ClusterAssignment run_once(const Matrix& K, int k, std::uint64_t seed, std::uint64_t restart,
                           std::size_t max_iterations) {
  const Eigen::Index n = K.rows();
  std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(restart), static_cast<std::uint32_t>(restart >> 32)};
  Rng rng(sseq);

  // k-means++ seeding on kernel distances
  std::vector<Eigen::Index> centers;
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  centers.push_back(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  chosen[static_cast<std::size_t>(centers[0])] = true;
  Vector d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = std::max(0.0, K(i, i) + K(centers[0], centers[0]) - 2.0 * K(i, centers[0]));
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!chosen[static_cast<std::size_t>(i)]) total += d2(i);
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (chosen[static_cast<std::size_t>(i)] || d2(i) <= 0.0) continue;
        acc += d2(i);
        pick = i;
        if (acc > u) break;
      }
    }
    if (pick < 0)
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (!chosen[static_cast<std::size_t>(i)]) pick = i;
    centers.push_back(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), std::max(0.0, K(i, i) + K(pick, pick) - 2.0 * K(i, pick)));
  }

  ClusterAssignment out;
  out.restart = restart;
  out.labels.assign(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const auto cc = centers[static_cast<std::size_t>(c)];
      const double v = i == cc ? -1.0 : K(i, i) + K(cc, cc) - 2.0 * K(i, cc);
      if (v < best) {
        best = v;
        out.labels[static_cast<std::size_t>(i)] = c;
      }
    }
  }

  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(K(i, i)));
  const double eps = 1e-12 * std::max(1.0, scale);

  Matrix dist = centroid_distances(K, out.labels, k);
  out.inertia_history.push_back(total_inertia(dist, out.labels));
  while (out.iterations < max_iterations) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int cur = out.labels[static_cast<std::size_t>(i)];
      int best = cur;
      double best_d = dist(i, cur) - eps;
      for (int c = 0; c < k; ++c) {
        if (c != cur && dist(i, c) < best_d) {
          best_d = dist(i, c);
          best = c;
        }
      }
      if (best != cur) {
        out.labels[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) {
      out.converged = true;
      break;
    }
    ++out.iterations;
    for (;;) {
      std::vector<int> size(static_cast<std::size_t>(k), 0);
      for (int l : out.labels) ++size[static_cast<std::size_t>(l)];
      const auto empty = std::find(size.begin(), size.end(), 0);
      if (empty == size.end()) break;
      const Matrix tmp = centroid_distances(K, out.labels, k);
      Eigen::Index far = -1;
      double far_d = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i) {
        const int l = out.labels[static_cast<std::size_t>(i)];
        if (size[static_cast<std::size_t>(l)] >= 2 && tmp(i, l) > far_d) {
          far_d = tmp(i, l);
          far = i;
        }
      }
      out.labels[static_cast<std::size_t>(far)] = static_cast<int>(empty - size.begin());
    }
    dist = centroid_distances(K, out.labels, k);
    out.inertia_history.push_back(total_inertia(dist, out.labels));
  }
  out.inertia = std::max(0.0, out.inertia_history.back());
  return out;
}

}  // namespace

std::vector<ClusterAssignment> kkmeans_all_restarts(const GramMatrix& gram, int k, std::uint64_t seed,
                                                    int restarts, const KkmeansOptions& options) {
  const Eigen::Index n = gram.size();
  if (k <= 0) throw InvalidKernelParameter("kkmeans: k must be positive");
  if (restarts <= 0) throw InvalidKernelParameter("kkmeans: restarts must be positive");
  if (k > n) throw InsufficientData("kkmeans: k=" + std::to_string(k) + " exceeds n=" + std::to_string(n));
  numerics::require_finite(gram.values);
  std::vector<ClusterAssignment> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), options.threads, [&](std::size_t r) {
    runs[r] = run_once(gram.values, k, seed, r, options.max_iterations);
  });
  return runs;
}

ClusterAssignment kkmeans(const GramMatrix& gram, int k, std::uint64_t seed, int restarts,
                          const KkmeansOptions& options) {
  auto runs = kkmeans_all_restarts(gram, k, seed, restarts, options);
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r)
    if (runs[r].inertia < runs[best].inertia) best = r;
  return std::move(runs[best]);
}

}  // namespace grasskern::machines
