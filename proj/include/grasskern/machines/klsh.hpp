#pragma once

// Kernelized locality-sensitive hashing. Bit r draws t anchors from the
// training set and hashes x to [sum_i w_i k(x, anchor_i) > 0] with
// w = K_tt^{-1/2} (e_S - |S|/t 1) for a random S of ceil(t/2) anchors.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "grasskern/kernels.hpp"

namespace grasskern::machines {

class HashKey {
 public:
  explicit HashKey(int bits = 0);

  int bits() const noexcept { return bits_; }
  bool get(int bit) const;
  void set(int bit, bool value);

  /// Hex digits, digit i holding bits 4i..4i+3 (bit 4i least significant).
  std::string to_hex() const;
  static HashKey from_hex(std::string_view hex, int bits);

  bool operator==(const HashKey&) const = default;

 private:
  int bits_;
  std::vector<std::uint64_t> words_{};

  friend int hamming(const HashKey& a, const HashKey& b);
};

int hamming(const HashKey& a, const HashKey& b);

struct HashFamily {
  int bit_count = 0;
  int anchors_per_bit = 0;
  std::vector<std::vector<int>> anchor_indices{};  // per bit, into the training set
  Matrix projection_weights{};                     // t x b
  KernelSpec spec;
  std::vector<int> pool{};                         // sorted distinct anchor indices
  std::vector<Subspace> pool_refs{};               // subspaces of `pool`, possibly empty
};

inline constexpr int kDefaultAnchors = 30;
inline constexpr double kKlshEigenFloor = 1e-10;

/// Throws InsufficientData when t > n. `refs`, if given, are the training
/// subspaces in Gram order; the anchors among them are kept for hashing new
/// queries.
HashFamily klsh_build(const GramMatrix& gram, int bits, int anchors, std::uint64_t seed,
                      std::span<const Subspace> refs = {});

/// Hash from kernel values against the whole training set (Gram order).
HashKey klsh_hash_row(const HashFamily& family, const Vector& kernel_row_full);

/// Hash a new subspace by evaluating the kernel against the anchors.
HashKey klsh_hash(const HashFamily& family, const Subspace& x);

/// Keys of every Gram row (the training set itself).
std::vector<HashKey> klsh_hash_training(const HashFamily& family, const GramMatrix& gram, unsigned threads = 1);

/// top_m database indices by ascending Hamming distance, ties to the lower
/// index. Throws EmptyDatabase.
std::vector<int> klsh_query(const HashFamily& family, std::span<const HashKey> db_keys, const HashKey& query,
                            int top_m);
std::vector<int> klsh_query(const HashFamily& family, std::span<const HashKey> db_keys, const Subspace& query,
                            int top_m);

}  // namespace grasskern::machines
