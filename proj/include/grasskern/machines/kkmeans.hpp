#pragma once

// Kernel k-means on a precomputed Gram matrix. Distances to centroids use
//   ||phi(x_i) - mu_c||^2 = K_ii - 2/|c| sum_j K_ij + 1/|c|^2 sum_jl K_jl.

#include <cstdint>
#include <vector>

#include "grasskern/kernels.hpp"

namespace grasskern::machines {

struct ClusterAssignment {
  std::vector<int> labels;              // in [0, k)
  double inertia = 0.0;
  std::vector<double> inertia_history;  // after seeding, then after every Lloyd iteration
  std::size_t iterations = 0;
  std::uint64_t restart = 0;            // which restart produced this result
  bool converged = false;
};

struct KkmeansOptions {
  std::size_t max_iterations = 300;
  unsigned threads = 1;  // restarts run in parallel, reduction is deterministic
};

/// Best of `restarts` k-means++-seeded runs (lowest inertia, then lowest
/// restart index). An emptied cluster is re-seeded with the point farthest
/// from its own centroid. Throws InsufficientData when k > n.
ClusterAssignment kkmeans(const GramMatrix& gram, int k, std::uint64_t seed, int restarts = 1,
                          const KkmeansOptions& options = {});

/// One logged run per restart, same order as the restart index.
std::vector<ClusterAssignment> kkmeans_all_restarts(const GramMatrix& gram, int k, std::uint64_t seed,
                                                    int restarts, const KkmeansOptions& options = {});

}  // namespace grasskern::machines
