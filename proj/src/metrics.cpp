#include "grasskern/machines/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "grasskern/error.hpp"

namespace grasskern::machines {

namespace {

std::vector<int> compact(std::span<const int> labels, int& count) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [_, v] : ids) v = next++;
  count = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

std::vector<std::vector<double>> contingency(std::span<const int> a_raw, std::span<const int> b_raw, int& ka,
                                             int& kb) {
  if (a_raw.size() != b_raw.size())
    throw DimensionMismatch("label vectors differ in length: " + std::to_string(a_raw.size()) + " vs " +
                            std::to_string(b_raw.size()));
  const auto a = compact(a_raw, ka);
  const auto b = compact(b_raw, kb);
  std::vector<std::vector<double>> t(static_cast<std::size_t>(ka), std::vector<double>(static_cast<std::size_t>(kb)));
  for (std::size_t i = 0; i < a.size(); ++i) t[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1;
  return t;
}

}  // namespace

double nmi(std::span<const int> predicted, std::span<const int> truth) {
  int ka = 0, kb = 0;
  const auto t = contingency(predicted, truth, ka, kb);
  const double n = static_cast<double>(predicted.size());
  if (n == 0) return 0.0;
  std::vector<double> pa(static_cast<std::size_t>(ka)), pb(static_cast<std::size_t>(kb));
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      pa[static_cast<std::size_t>(i)] += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / n;
      pb[static_cast<std::size_t>(j)] += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / n;
    }
  const auto entropy = [](const std::vector<double>& p) {
    double h = 0.0;
    for (double v : p)
      if (v > 0) h -= v * std::log(v);
    return h;
  };
  const double ha = entropy(pa), hb = entropy(pb);
  if (ha <= 0.0 || hb <= 0.0) return 0.0;
  double mi = 0.0;
  for (int i = 0; i < ka; ++i)
    for (int j = 0; j < kb; ++j) {
      const double pij = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / n;
      if (pij > 0) mi += pij * std::log(pij / (pa[static_cast<std::size_t>(i)] * pb[static_cast<std::size_t>(j)]));
    }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double clustering_accuracy(std::span<const int> predicted, std::span<const int> truth) {
  int ka = 0, kb = 0;
  const auto t = contingency(predicted, truth, ka, kb);
  if (predicted.empty()) return 0.0;
  if (ka > 12 || kb > 12)
    throw InvalidDimensions("clustering_accuracy supports at most 12 labels per side, got " + std::to_string(ka) +
                            " and " + std::to_string(kb));
  // best assignment of predicted clusters, in order, to distinct truth
  // labels. dp over the set of truth labels already used
  const std::size_t states = std::size_t{1} << kb;
  std::vector<double> dp(states, -1.0);
  dp[0] = 0.0;
  for (int i = 0; i < ka; ++i) {
    std::vector<double> next = dp;  // cluster i left unmatched
    for (std::size_t s = 0; s < states; ++s) {
      if (dp[s] < 0) continue;
      for (int j = 0; j < kb; ++j) {
        if (s & (std::size_t{1} << j)) continue;
        const auto ns = s | (std::size_t{1} << j);
        next[ns] = std::max(next[ns], dp[s] + t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
    dp = std::move(next);
  }
  return *std::max_element(dp.begin(), dp.end()) / static_cast<double>(predicted.size());
}

}  // namespace grasskern::machines
