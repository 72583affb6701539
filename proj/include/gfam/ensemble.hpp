#pragma once

// Ensemble subspace clustering: many seeded base runs vote into a
// co-association matrix, which is sparsified and handed to spectral
// clustering. The number of clusters comes from a second, α = 0.5 ensemble.

#include <cstdint>
#include <vector>

#include "gfam/partition.hpp"

namespace gfam {

struct CoAssociation {
  Eigen::MatrixXd a;  // a_ij = fraction of runs that put i and j together
  std::size_t runs = 0;
  std::size_t q = 0;  // 0 until thresholded
};

enum class ThresholdMode {
  row_or_column,  // keep if in the top q of its row or of its column
  row_and_column
};

/// Seed of base run b.
inline std::uint64_t run_seed(std::uint64_t seed, std::size_t b) { return seed ^ static_cast<std::uint64_t>(b); }

/// B independent runs of `cfg` with seeds seed⊕b. `threads` > 1 runs them concurrently.
CoAssociation run_ensemble(const DataMatrix& data, const FamilyConfig& cfg, std::size_t runs,
                           std::size_t threads = 1);

CoAssociation threshold_topq(const CoAssociation& a, std::size_t q,
                             ThresholdMode mode = ThresholdMode::row_or_column);

/// Ng–Jordan–Weiss: top-k eigenvectors of D^{-1/2} A D^{-1/2}, rows normalized,
/// then k-means (the α = 1 family member) with 10 seeded restarts.
Labels spectral_cluster(const CoAssociation& a, std::size_t k, std::uint64_t seed);

/// round(mean final k) over B runs of `cfg`, at least 1.
std::size_t estimate_k(const DataMatrix& data, const FamilyConfig& cfg, std::size_t runs,
                       std::size_t threads = 1, std::vector<std::size_t>* finals = nullptr);

/// Adaptive α = 0.5, tol = 0.1 configuration for k estimation.
FamilyConfig kest_config(std::size_t k_init, std::size_t total_dim, std::uint64_t seed);
/// Adaptive α = 0, tol = 0.01 configuration for affinity runs.
FamilyConfig affinity_config(std::size_t k_init, std::size_t total_dim, std::uint64_t seed);

struct EnsembleResult {
  Labels labels;
  std::size_t k_hat = 0;
  std::vector<std::size_t> kest_finals;
  CoAssociation affinity;  // after thresholding
};

EnsembleResult ensemble_pipeline(const DataMatrix& data, const FamilyConfig& cfg_kest,
                                 const FamilyConfig& cfg_affinity, std::size_t runs, std::size_t q,
                                 ThresholdMode mode = ThresholdMode::row_or_column,
                                 std::size_t threads = 1);

/// k-means via the α = 1 family member, seeded by k-means++; best of `restarts`.
Labels kmeans(const DataMatrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts = 10);

}  // namespace gfam
