#pragma once

#include "gfam/matio.hpp"

namespace gfam {

/// Adjusted Rand index; 1 for identical partitions up to relabeling.
double adjusted_rand_index(const Labels& a, const Labels& b);

/// Fraction of points misassigned under the best one-to-one matching of
/// predicted to true labels (Hungarian assignment on the contingency table).
double clustering_error(const Labels& predicted, const Labels& truth);

}  // namespace gfam
