#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "grasskern/kernels.hpp"

namespace grasskern::harness {

struct Dataset {
  std::string name;
  std::vector<Subspace> subspaces;
  std::vector<int> labels;  // empty when unlabeled

  bool has_labels() const noexcept { return !labels.empty(); }
  std::size_t size() const noexcept { return subspaces.size(); }
  Eigen::Index ambient_dim() const { return subspaces.empty() ? 0 : subspaces.front().ambient_dim(); }
  Eigen::Index dim() const { return subspaces.empty() ? 0 : subspaces.front().dim(); }
  std::string fingerprint() const;
  /// Distinct labels, ascending.
  std::vector<int> classes() const;

  /// Homogeneous (d, p) and matching label count, else DimensionMismatch.
  void validate() const;
};

struct PlantedOptions {
  Eigen::Index d = 10;
  Eigen::Index p = 2;
  int classes = 2;
  int per_class = 20;
  double noise_angle = 0.1;
  std::uint64_t seed = 0;
  bool orthogonal_prototypes = false;  // mutually orthogonal prototypes, needs classes * p <= d
  std::string name = "planted";
};

/// Prototype per class, members rotated away from it by principal angles
/// drawn uniformly from [0, noise_angle] and given a random basis.
/// Throws InvalidDimensions when p >= d (or 2p > d with noise).
Dataset generate_planted(const PlantedOptions& options);

/// Set when classes * p > d, where prototypes cannot be well separated.
std::optional<std::string> planted_warning(const PlantedOptions& options);

/// Span of the top-p left singular vectors of a d x m data matrix.
/// Throws RankDeficient when the rank is below p.
Subspace subspace_from_samples(const Matrix& data, Eigen::Index p);

std::string serialize_dataset(const Dataset& data);
Dataset parse_dataset(std::string_view text);

/// "# format_version=1 spec=<record> fingerprint=<hex> n=<n>" then one CSV
/// row per Gram row, 17 significant digits.
std::string gram_to_csv(const GramMatrix& gram);
GramMatrix gram_from_csv(std::string_view text, Eigen::Index p);

struct Split {
  std::vector<int> train;  // ascending
  std::vector<int> test;   // ascending
};

/// Stratified by label: round(train_fraction * class size) of every class
/// (at least one on each side when the class has two or more members).
Split stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed);

}  // namespace grasskern::harness
