#pragma once

// Seeded synthetic inputs. Every generator is a pure function of its
// arguments; points are emitted cluster by cluster.

#include <cstdint>
#include <vector>

#include "gfam/matio.hpp"

namespace gfam {

struct GroundTruth {
  Labels labels;
  std::size_t true_k = 0;
  std::vector<std::size_t> true_dims;
};

struct Generated {
  DataMatrix data;
  GroundTruth truth;
  std::vector<Eigen::MatrixXd> components;  // blob centers (m×1) or subspace bases
};

/// k isotropic Gaussian clouds; centers uniform on the sphere of radius `separation`.
Generated gen_blobs(std::size_t k, std::size_t ambient, std::size_t per_cluster, double spread,
                    double separation, std::uint64_t seed);

/// Two random planes and a random line through the origin of R³; coefficients
/// uniform in [−1, 1], plus N(0, noise²) per coordinate.
Generated gen_planes_line(std::size_t n_plane, std::size_t n_line, double noise, std::uint64_t seed);

enum class Decay { flat, geometric };

struct LowRank {
  DataMatrix data;
  Eigen::VectorXd sigma;  // planted singular values
};

/// Σ σ_j u_j v_jᵀ + noise·G with Haar-like orthonormal factors; σ_j = 1 or 0.8^j.
LowRank gen_lowrank_noise(std::size_t m, std::size_t n, std::size_t rank, double noise, Decay decay,
                          std::uint64_t seed);

/// Column blocks drawn from independent low-rank models, concatenated. Used as a
/// stand-in for class-structured image data when no real data set is present.
Generated gen_clustered_lowrank(std::size_t m, std::size_t blocks, std::size_t cols_per_block,
                                std::size_t rank, double noise, std::uint64_t seed);

}  // namespace gfam
