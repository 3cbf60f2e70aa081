#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "grasskern/error.hpp"
#include "grasskern/machines/klsh.hpp"
#include "grasskern/sampling.hpp"

using namespace grasskern;
using namespace grasskern::machines;

namespace {

const KernelSpec kRbf = KernelSpec::make(Embedding::projection, Family::rbf, 2, 1, 1.0);

std::vector<Subspace> random_set(int n, Rng& rng, Eigen::Index d = 10) {
  std::vector<Subspace> out;
  for (int i = 0; i < n; ++i) out.push_back(random_subspace(d, 2, rng));
  return out;
}

}  // namespace

TEST_CASE("hash keys") {
  HashKey k(70);
  k.set(0, true);
  k.set(5, true);
  k.set(69, true);
  CHECK(k.get(5));
  CHECK_FALSE(k.get(6));
  const auto hex = k.to_hex();
  CHECK(hex.size() == 18);
  CHECK(hex.substr(0, 2) == "12");
  CHECK(HashKey::from_hex(hex, 70) == k);
  HashKey z(70);
  CHECK(hamming(k, z) == 3);
  CHECK_THROWS_AS(HashKey::from_hex("zz", 8), ParseError);
  CHECK_THROWS_AS(HashKey::from_hex("f", 3), ParseError);
  CHECK_THROWS_AS(k.get(70), InvalidDimensions);
  CHECK_THROWS_AS(hamming(k, HashKey(8)), DimensionMismatch);
}

TEST_CASE("weights follow the construction") {
  Rng rng(1);
  const auto x = random_set(40, rng);
  const auto g = gram(kRbf, x);
  const auto fam = klsh_build(g, 4, 10, 7);
  REQUIRE(fam.anchor_indices.size() == 4);
  for (int r = 0; r < 4; ++r) {
    const auto& idx = fam.anchor_indices[static_cast<std::size_t>(r)];
    std::vector<int> sorted = idx;
    std::sort(sorted.begin(), sorted.end());
    CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    const Matrix ktt = g.values(idx, idx);
    // K^{1/2} w = e_S - |S|/t: entries take the two values 1 - 1/2 and -1/2
    const auto eig = numerics::symmetric_eigen(ktt);
    const Matrix half = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().asDiagonal() * eig.vectors.transpose();
    const Vector e = half * fam.projection_weights.col(r);
    int ones = 0;
    for (Eigen::Index a = 0; a < e.size(); ++a) {
      const bool in_s = std::abs(e(a) - 0.5) < 1e-6;
      CHECK((in_s || std::abs(e(a) + 0.5) < 1e-6));
      ones += in_s;
    }
    CHECK(ones == 5);
  }
}

TEST_CASE("determinism and identical inputs") {
  Rng rng(2);
  const auto x = random_set(50, rng);
  const auto g = gram(kRbf, x);
  const auto a = klsh_build(g, 32, 20, 11, x);
  const auto b = klsh_build(g, 32, 20, 11, x);
  CHECK(a.projection_weights == b.projection_weights);
  CHECK(a.anchor_indices == b.anchor_indices);
  const auto keys1 = klsh_hash_training(a, g);
  const auto keys8 = klsh_hash_training(a, g, 8);
  CHECK(keys1 == keys8);
  const int anchor = a.anchor_indices[0][0];
  CHECK(klsh_hash(a, x[static_cast<std::size_t>(anchor)]) == klsh_hash(a, x[static_cast<std::size_t>(anchor)]));
  const auto q = random_subspace(10, 2, rng);
  CHECK(hamming(klsh_hash(a, q), klsh_hash(a, q.rebased(random_orthogonal(2, rng)))) <= 1);
  CHECK(klsh_hash(a, q).to_hex() == klsh_hash(b, q).to_hex());
  // training keys from rows agree with keys from subspaces
  for (std::size_t i = 0; i < x.size(); i += 7) CHECK(klsh_hash(a, x[i]) == keys1[i]);
  const auto c = klsh_build(g, 32, 20, 12, x);
  CHECK_FALSE(c.anchor_indices == a.anchor_indices);
}

TEST_CASE("near duplicates hash closer than strangers") {
  Rng rng(3);
  const int n = 60;
  std::vector<Subspace> x = random_set(n, rng);
  std::vector<Subspace> all = x;
  for (int i = 0; i < n; ++i) {
    // tiny rotation of x[i]
    const Matrix& b = x[static_cast<std::size_t>(i)].basis();
    Matrix w = gaussian_matrix(10, 2, rng);
    w -= b * (b.transpose() * w);
    w = numerics::orthonormalize(w);
    all.emplace_back(numerics::orthonormalize(std::cos(0.02) * b + std::sin(0.02) * w));
  }
  const auto g = gram(kRbf, all);
  const auto fam = klsh_build(g, 32, 30, 5);
  const auto keys = klsh_hash_training(fam, g);
  int good = 0;
  for (int i = 0; i < n; ++i) {
    const auto& kq = keys[static_cast<std::size_t>(i)];
    const int near = hamming(kq, keys[static_cast<std::size_t>(i + n)]);
    std::vector<int> others;
    for (int j = 0; j < 2 * n; ++j)
      if (j != i && j != i + n) others.push_back(hamming(kq, keys[static_cast<std::size_t>(j)]));
    std::nth_element(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(others.size() / 2), others.end());
    good += near < others[others.size() / 2];
  }
  CHECK(good >= 0.9 * n);
}

TEST_CASE("queries") {
  Rng rng(4);
  const auto x = random_set(30, rng);
  const auto g = gram(kRbf, x);
  const auto fam = klsh_build(g, 24, 10, 3, x);
  const auto db = klsh_hash_training(fam, g);
  for (int i = 0; i < 30; i += 5) {
    const auto got = klsh_query(fam, db, x[static_cast<std::size_t>(i)], 5);
    REQUIRE(!got.empty());
    CHECK(hamming(db[static_cast<std::size_t>(got[0])], db[static_cast<std::size_t>(i)]) == 0);
    // identical keys rank by index, so i is first unless a lower index collides
    if (got[0] != i) CHECK(got[0] < i);
  }
  auto full = klsh_query(fam, db, db[3], 30);
  for (std::size_t r = 1; r < full.size(); ++r) {
    const int h0 = hamming(db[static_cast<std::size_t>(full[r - 1])], db[3]);
    const int h1 = hamming(db[static_cast<std::size_t>(full[r])], db[3]);
    CHECK((h0 < h1 || (h0 == h1 && full[r - 1] < full[r])));
  }
  std::sort(full.begin(), full.end());
  std::vector<int> all(30);
  std::iota(all.begin(), all.end(), 0);
  CHECK(full == all);
  CHECK_THROWS_AS(klsh_query(fam, std::vector<HashKey>{}, db[0], 3), EmptyDatabase);
  CHECK_THROWS_AS(klsh_build(g, 8, 31, 1), InsufficientData);
  const auto bare = klsh_build(g, 8, 5, 1);
  CHECK_THROWS_AS(klsh_hash(bare, x[0]), DimensionMismatch);
}
