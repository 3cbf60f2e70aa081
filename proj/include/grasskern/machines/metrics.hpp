#pragma once

#include <span>

namespace grasskern::machines {

/// I(a; b) / sqrt(H(a) H(b)); zero when either labeling has zero entropy.
double nmi(std::span<const int> predicted, std::span<const int> truth);

/// Fraction of points matched under the best one-to-one relabeling of the
/// predicted clusters. At most 12 distinct labels on either side.
double clustering_accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace grasskern::machines
