#pragma once

// The α-indexed partitioning family. Each cluster i carries a mean m_i and an
// orthonormal basis U_i (m×d_i); the objective is
//
//   G_α = Σ_i Σ_{x∈V_i} ‖x − m_i‖² − (1−α)‖U_iᵀ(x − m_i)‖².
//
// α = 1 is k-means, α = 0 is k-subspaces (VQPCA; CVOD when the means are
// pinned at zero), α ∈ (0,1) mixes the two. Adaptive runs re-split a total
// dimension budget r across clusters every iteration and drop clusters that
// receive no direction.

#include <cstdint>
#include <string>
#include <vector>

#include "gfam/linalg.hpp"
#include "gfam/matio.hpp"

namespace gfam {

enum class InitKind { random_partition, given_labels, correlation_quantile };

/// How snapshots are centered before pairwise correlations are taken.
enum class CorrelationCentering { per_vector, per_feature };

/// Empty clusters after a Voronoi step: kept with stale parameters, or deleted.
enum class EmptyPolicy { keep, remove };

struct FamilyConfig {
  double alpha = 1.0;
  std::size_t k_init = 1;
  std::vector<std::size_t> dims;  // explicit per-cluster dims; empty -> split total_dim
  std::size_t total_dim = 0;
  double tol = 0.1;
  std::size_t max_iter = 50;
  bool adaptive = false;
  bool fix_means_zero = false;
  double eta = 1e-8;  // step regularizer, applied as eta·(1 + ζ_i)
  std::uint64_t seed = 0;
  InitKind init = InitKind::random_partition;
  Labels initial_labels;  // used when init == given_labels
  CorrelationCentering centering = CorrelationCentering::per_vector;
};

/// Throws ArgumentError when `cfg` is inconsistent with itself or with `data`.
void validate_config(const FamilyConfig& cfg, const DataMatrix& data);

/// Sum of per-cluster dims, or total_dim when dims are not explicit.
std::size_t budget(const FamilyConfig& cfg);

/// floor(r/k) per cluster, remainder handed one-each to the lowest indices.
std::vector<std::size_t> split_dims(std::size_t r, std::size_t k);

struct PartitionState {
  Labels labels;  // -1 marks a point orphaned by adaptation until the next Voronoi step
  std::vector<Vector> means;
  std::vector<Eigen::MatrixXd> bases;
  std::vector<std::size_t> dims;         // basis widths
  std::vector<std::size_t> target_dims;  // requested widths before rank clamping
  bool fix_means_zero = false;
  std::vector<std::string> flags;

  std::size_t k() const { return means.size(); }
  std::vector<std::vector<Index>> members() const;
};

PartitionState init_state(const DataMatrix& data, const FamilyConfig& cfg);

/// Per-point summand ‖x − m‖² − (1−α)‖Uᵀ(x − m)‖² for every column of `points`.
Eigen::VectorXd point_costs(const Eigen::Ref<const Eigen::MatrixXd>& points, const Vector& mean,
                            const Eigen::MatrixXd& basis, double alpha);

double energy(const DataMatrix& data, const PartitionState& s, double alpha);
double cluster_energy(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                      double alpha);

PartitionState centroid_update(const DataMatrix& data, PartitionState s);

/// Global top-r directions of diag(V_i − m_i); clusters left with no direction are removed.
PartitionState centroid_update_adaptive(const DataMatrix& data, PartitionState s, std::size_t r);

/// Which (σ, block, position) triples an adaptive step keeps, in selection order.
struct Direction {
  double sigma;
  std::size_t block;
  Index position;
};
std::vector<Direction> select_directions(const std::vector<Eigen::VectorXd>& spectra,
                                         std::size_t r);

PartitionState voronoi_update(const DataMatrix& data, PartitionState s, double alpha,
                              EmptyPolicy policy);

/// Gradient of G_α with respect to m_i: 2|V_i| Γ_i (m_i − x̄_i), Γ_i = I − (1−α)U_iU_iᵀ.
Vector mean_gradient(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                     double alpha);

/// One line-search-free gradient step on m_i.
struct MeanStep {
  Vector y;
  double xi = 0.0;
  double zeta = 0.0;
  double gamma = 0.0;
};
MeanStep mean_step(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                   double alpha, double eta);

PartitionState mean_update(const DataMatrix& data, PartitionState s, double alpha, double eta);

struct RunResult {
  PartitionState state;
  RunReport report;
};

RunResult run(const DataMatrix& data, const FamilyConfig& cfg);

/// Relabel to 0..k'-1 dropping empty clusters; returns the old->new map (-1 if dropped).
std::vector<int> compact_clusters(PartitionState& s);

}  // namespace gfam
