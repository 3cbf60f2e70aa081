#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "grasskern/error.hpp"
#include "grasskern/machines/metrics.hpp"
#include "oracles.hpp"

using namespace grasskern;
using namespace grasskern::machines;

TEST_CASE("nmi edge cases") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  CHECK(nmi(truth, truth) == doctest::Approx(1.0));
  const std::vector<int> renamed = {5, 5, 3, 3, 9, 9};
  CHECK(nmi(renamed, truth) == doctest::Approx(1.0));
  const std::vector<int> two = {0, 0, 0, 1, 1, 1};
  const std::vector<int> constant(6, 4);
  CHECK(nmi(constant, two) == 0.0);
  CHECK(nmi(constant, constant) == 0.0);
  CHECK_THROWS_AS(nmi(two, std::span<const int>(truth).first(5)), DimensionMismatch);
}

TEST_CASE("nmi with one flipped point matches the entropy oracle") {
  std::vector<int> truth(100), pred(100);
  for (int i = 0; i < 100; ++i) truth[static_cast<std::size_t>(i)] = pred[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
  pred[7] = 1;
  const double v = nmi(pred, truth);
  CHECK(v > 0.85);
  CHECK(v < 1.0);
  CHECK(v == doctest::Approx(oracle::nmi_by_hand(pred, truth)).epsilon(1e-12));
}

TEST_CASE("clustering accuracy") {
  const std::vector<int> truth = {0, 0, 1, 1, 2, 2};
  CHECK(clustering_accuracy(truth, truth) == 1.0);
  const std::vector<int> perm = {2, 2, 0, 0, 1, 1};
  CHECK(clustering_accuracy(perm, truth) == 1.0);

  std::vector<int> t30, p30;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10; ++i) {
      t30.push_back(c);
      p30.push_back((c + 1) % 3);
    }
  p30[3] = 0;   // should be 1
  p30[15] = 0;  // should be 2
  CHECK(clustering_accuracy(p30, t30) == doctest::Approx(28.0 / 30.0));
  CHECK(clustering_accuracy(p30, t30) == doctest::Approx(oracle::accuracy_by_permutation(p30, t30, 3)));

  // more predicted clusters than truth labels
  const std::vector<int> over = {0, 1, 2, 3, 4, 5};
  CHECK(clustering_accuracy(over, truth) == doctest::Approx(0.5));
  CHECK(clustering_accuracy(over, truth) == doctest::Approx(oracle::accuracy_by_permutation(over, truth, 6)));

  std::vector<int> many(13);
  for (int i = 0; i < 13; ++i) many[static_cast<std::size_t>(i)] = i;
  CHECK_THROWS_AS(clustering_accuracy(many, many), InvalidDimensions);
  CHECK_THROWS_AS(clustering_accuracy(perm, std::span<const int>(truth).first(2)), DimensionMismatch);
}

TEST_CASE("random labelings agree with brute force") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> a(20), b(20);
    for (auto& v : a) v = static_cast<int>(rng() % 4);
    for (auto& v : b) v = static_cast<int>(rng() % 5);
    CHECK(clustering_accuracy(a, b) == doctest::Approx(oracle::accuracy_by_permutation(a, b, 5)));
    CHECK(nmi(a, b) == doctest::Approx(oracle::nmi_by_hand(a, b)).epsilon(1e-12));
  }
}
