#include "grasskern/machines/klsh.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "grasskern/error.hpp"
#include "grasskern/parallel.hpp"
#include "grasskern/sampling.hpp"

namespace grasskern::machines {

HashKey::HashKey(int bits) : bits_(bits), words_(static_cast<std::size_t>((std::max(bits, 0) + 63) / 64), 0) {
  if (bits < 0) throw InvalidDimensions("hash key needs a non-negative bit count");
}

bool HashKey::get(int bit) const {
  if (bit < 0 || bit >= bits_) throw InvalidDimensions("hash bit " + std::to_string(bit) + " out of range");
  return (words_[static_cast<std::size_t>(bit / 64)] >> (bit % 64)) & 1U;
}

void HashKey::set(int bit, bool value) {
  if (bit < 0 || bit >= bits_) throw InvalidDimensions("hash bit " + std::to_string(bit) + " out of range");
  auto& w = words_[static_cast<std::size_t>(bit / 64)];
  const std::uint64_t mask = std::uint64_t{1} << (bit % 64);
  w = value ? (w | mask) : (w & ~mask);
}

std::string HashKey::to_hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (int d = 0; d * 4 < bits_; ++d) {
    unsigned v = 0;
    for (int b = 0; b < 4 && d * 4 + b < bits_; ++b) v |= static_cast<unsigned>(get(d * 4 + b)) << b;
    out.push_back(kHex[v]);
  }
  return out;
}

HashKey HashKey::from_hex(std::string_view hex, int bits) {
  HashKey key(bits);
  if (hex.size() != static_cast<std::size_t>((bits + 3) / 4))
    throw ParseError("hash key '" + std::string(hex) + "' has the wrong length for " + std::to_string(bits) + " bits");
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[d];
    int v = -1;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    if (v < 0) throw ParseError("bad hex digit in hash key '" + std::string(hex) + "'");
    for (int b = 0; b < 4; ++b) {
      const int bit = static_cast<int>(d) * 4 + b;
      if ((v >> b) & 1) {
        if (bit >= bits) throw ParseError("hash key '" + std::string(hex) + "' sets bits past " + std::to_string(bits));
        key.set(bit, true);
      }
    }
  }
  return key;
}

int hamming(const HashKey& a, const HashKey& b) {
  if (a.bits_ != b.bits_) throw DimensionMismatch("hash keys of different lengths");
  int h = 0;
  for (std::size_t i = 0; i < a.words_.size(); ++i) h += std::popcount(a.words_[i] ^ b.words_[i]);
  return h;
}

namespace {

std::vector<int> sample_without_replacement(int n, int t, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = 0; i < t; ++i) {
    const int j = std::uniform_int_distribution<int>(i, n - 1)(rng);
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(t));
  return idx;
}

}  // namespace

HashFamily klsh_build(const GramMatrix& gram, int bits, int anchors, std::uint64_t seed,
                      std::span<const Subspace> refs) {
  const auto n = static_cast<int>(gram.size());
  if (bits <= 0) throw InvalidDimensions("klsh_build: bit count must be positive");
  if (anchors <= 0) throw InvalidDimensions("klsh_build: anchor count must be positive");
  if (anchors > n)
    throw InsufficientData("klsh_build: " + std::to_string(anchors) + " anchors requested from " + std::to_string(n) +
                           " points");
  if (!refs.empty() && refs.size() != static_cast<std::size_t>(n))
    throw DimensionMismatch("klsh_build: reference count does not match the Gram");
  numerics::require_finite(gram.values);

  Rng rng(seed);
  HashFamily fam{.bit_count = bits, .anchors_per_bit = anchors, .projection_weights = Matrix(anchors, bits),
                 .spec = gram.spec};
  const int half = (anchors + 1) / 2;
  for (int r = 0; r < bits; ++r) {
    auto idx = sample_without_replacement(n, anchors, rng);
    const auto subset = sample_without_replacement(anchors, half, rng);
    Matrix ktt(anchors, anchors);
    for (int a = 0; a < anchors; ++a)
      for (int b = 0; b < anchors; ++b)
        ktt(a, b) = gram.values(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    const auto eig = numerics::symmetric_eigen(ktt);
    Vector inv_sqrt(anchors);
    for (int a = 0; a < anchors; ++a) inv_sqrt(a) = eig.values(a) > kKlshEigenFloor ? 1.0 / std::sqrt(eig.values(a)) : 0.0;
    Vector e = Vector::Constant(anchors, -static_cast<double>(half) / anchors);
    for (int s : subset) e(s) += 1.0;
    fam.projection_weights.col(r) = eig.vectors * (inv_sqrt.asDiagonal() * (eig.vectors.transpose() * e));
    fam.anchor_indices.push_back(std::move(idx));
  }
  for (const auto& a : fam.anchor_indices) fam.pool.insert(fam.pool.end(), a.begin(), a.end());
  std::sort(fam.pool.begin(), fam.pool.end());
  fam.pool.erase(std::unique(fam.pool.begin(), fam.pool.end()), fam.pool.end());
  if (!refs.empty())
    for (int i : fam.pool) fam.pool_refs.push_back(refs[static_cast<std::size_t>(i)]);
  return fam;
}

HashKey klsh_hash_row(const HashFamily& family, const Vector& row) {
  HashKey key(family.bit_count);
  for (int r = 0; r < family.bit_count; ++r) {
    const auto& idx = family.anchor_indices[static_cast<std::size_t>(r)];
    double s = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] >= row.size()) throw DimensionMismatch("klsh_hash_row: kernel row is too short");
      s += family.projection_weights(static_cast<Eigen::Index>(a), r) * row(idx[a]);
    }
    key.set(r, s > 0.0);
  }
  return key;
}

HashKey klsh_hash(const HashFamily& family, const Subspace& x) {
  if (family.pool_refs.size() != family.pool.size())
    throw DimensionMismatch("klsh_hash: hash family carries no anchor subspaces");
  Vector row = Vector::Zero(family.pool.empty() ? 0 : family.pool.back() + 1);
  for (std::size_t m = 0; m < family.pool.size(); ++m) row(family.pool[m]) = evaluate(family.spec, x, family.pool_refs[m]);
  return klsh_hash_row(family, row);
}

std::vector<HashKey> klsh_hash_training(const HashFamily& family, const GramMatrix& gram, unsigned threads) {
  std::vector<HashKey> keys(static_cast<std::size_t>(gram.size()));
  parallel_for(keys.size(), threads, [&](std::size_t i) {
    keys[i] = klsh_hash_row(family, gram.values.row(static_cast<Eigen::Index>(i)).transpose());
  });
  return keys;
}

std::vector<int> klsh_query(const HashFamily& family, std::span<const HashKey> db_keys, const HashKey& query,
                            int top_m) {
  if (db_keys.empty()) throw EmptyDatabase("klsh_query: empty database");
  if (query.bits() != family.bit_count) throw DimensionMismatch("klsh_query: query key length differs from family");
  std::vector<std::pair<int, int>> order;
  order.reserve(db_keys.size());
  for (std::size_t i = 0; i < db_keys.size(); ++i) order.emplace_back(hamming(db_keys[i], query), static_cast<int>(i));
  const auto m = static_cast<std::size_t>(std::clamp(top_m, 0, static_cast<int>(order.size())));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end());
  std::vector<int> out;
  for (std::size_t i = 0; i < m; ++i) out.push_back(order[i].second);
  return out;
}

std::vector<int> klsh_query(const HashFamily& family, std::span<const HashKey> db_keys, const Subspace& query,
                            int top_m) {
  if (db_keys.empty()) throw EmptyDatabase("klsh_query: empty database");
  return klsh_query(family, db_keys, klsh_hash(family, query), top_m);
}

}  // namespace grasskern::machines
