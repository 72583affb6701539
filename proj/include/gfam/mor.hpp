#pragma once

// Reaction-diffusion snapshot generation and the POD / partitioned-basis
// comparison on those snapshots.
//
//   z_t = ν Δz + c (z² − z³)  on (0,1)², z = 0 on the boundary,
//   z(x, y, 0) = A sin(πx) sin(πy).

#include <Eigen/Sparse>
#include <filesystem>
#include <string>
#include <vector>

#include "gfam/matio.hpp"
#include "gfam/partition.hpp"

namespace gfam {

struct PdeConfig {
  double nu = 0.05;  // diffusion coefficient
  double dx = 0.05;  // grid spacing, dx = dy
  double dt = 0.05;
  double t_final = 2.0;
  double newton_tol = 1e-10;
  std::size_t newton_max = 25;
  double reaction = 10.0;   // c in f(z) = c(z² − z³); 0 switches the source off
  double amplitude = 1.0;   // A in the initial condition
};

/// Grid of the published experiment (6241 interior unknowns).
PdeConfig fine_grid_pde();

PdeConfig load_pde_config(const std::filesystem::path& path);
std::string pde_config_to_json(const PdeConfig& cfg);

struct SnapshotSet {
  DataMatrix snapshots;  // interior unknowns × time levels
  std::vector<double> times;
  Index grid_n = 0;  // interior points per side
  double max_newton_residual = 0.0;
  std::size_t max_newton_iterations = 0;
};

/// Interior grid size for `dx`; throws ArgumentError unless 1/dx is an integer.
Index interior_size(double dx);

/// Unscaled 5-point Laplacian on the interior grid (Dirichlet zero outside).
Eigen::SparseMatrix<double> laplacian_5pt(Index grid_n);

/// Implicit Euler in time, Newton on each step.
SnapshotSet simulate_snapshots(const PdeConfig& cfg);

/// Embed interior snapshots in the full (n+2)² grid with the zero boundary.
DataMatrix to_full_grid(const SnapshotSet& s);

/// Quantile-binned greedy pairing on |corr(x_i, x_j)|. Labels are bin indices
/// (0 = lowest-correlation bin) and may skip unused bins.
Labels correlation_quantile_init(const DataMatrix& data, std::size_t k,
                                 CorrelationCentering centering = CorrelationCentering::per_vector,
                                 std::vector<std::string>* flags = nullptr);

/// Absolute correlation matrix used by the initializer (diagonal = 1, zero-variance rows = 0).
Eigen::MatrixXd abs_correlations(const DataMatrix& data, CorrelationCentering centering,
                                 std::vector<std::string>* flags = nullptr);

/// Empirical quantile, linear interpolation between order statistics.
double empirical_quantile(std::vector<double> sorted_values, double p);

/// Leading r left singular vectors of the uncentered snapshot matrix.
Eigen::MatrixXd pod_basis(const DataMatrix& snapshots, Index r);

struct MorComparison {
  std::vector<double> times;
  std::vector<double> pod_err;
  std::vector<double> family_err;
  double mean_pod = 0.0;
  double mean_family = 0.0;
  std::size_t final_k = 0;
  std::vector<std::size_t> final_dims;
  double g_star = 0.0;
  RunReport report;
};

/// Adaptive CVOD (α=0, zero means) seeded by the correlation initializer vs POD,
/// both with r basis vectors; errors are per-snapshot ‖(I−Φ)x‖/‖x‖.
MorComparison compare_pod_vs_family(const SnapshotSet& s, std::size_t r, std::size_t k_init,
                                    double tol,
                                    CorrelationCentering centering = CorrelationCentering::per_vector);

/// "t,pod_err,family_err" with one row per snapshot.
std::string comparison_csv(const MorComparison& c);

}  // namespace gfam
