#pragma once

// Column subset selection and CUR assembly, optionally paired with an α = 0
// partition of the columns: each cluster contributes as many columns as the
// adaptive run assigned it dimensions.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfam/linalg.hpp"
#include "gfam/partition.hpp"

namespace gfam {

enum class CsspMethod { deim, cpqr, lupp };
enum class PairingVariant {
  cvod_based,  // cluster means pinned at zero
  vqpca_based  // free cluster means; selection runs on centered blocks
};

std::string to_string(CsspMethod m);
CsspMethod parse_method(const std::string& s);

struct SelectionResult {
  std::vector<Index> col_indices;
  std::vector<Index> row_indices;
  double relative_error = 0.0;  // ‖(I − CC⁺)A‖_F² / ‖A‖_F²
  double residual_norm = 0.0;   // ‖(I − CC⁺)A‖_F
  std::optional<double> g_star;  // final family energy, paired selections only
  CsspMethod method = CsspMethod::cpqr;
  bool paired = false;
  bool rank_deficient = false;
  std::vector<std::size_t> cluster_dims;
};

/// Greedy DEIM interpolation indices for the columns of `basis` (n×r).
std::vector<Index> deim_indices(const Eigen::MatrixXd& basis, bool* deficient = nullptr);

/// Up to r column indices of `a` chosen by `method`.
std::vector<Index> select_indices(const Eigen::MatrixXd& a, Index r, CsspMethod method,
                                  bool* deficient = nullptr);

SelectionResult select_columns(const DataMatrix& a, Index r, CsspMethod method);

struct PairingOptions {
  double tol = 0.1;
  std::size_t max_iter = 50;
};

SelectionResult partitioned_select(const DataMatrix& a, Index r, std::size_t k_init,
                                   CsspMethod method, PairingVariant variant, std::uint64_t seed,
                                   const PairingOptions& opts = {});

enum class CurMode {
  pseudo,   // U = C⁺ A R⁺
  skeleton  // U = A(J, I)⁺
};

struct CurResult {
  Eigen::MatrixXd C, U, R;
  double relative_error = 0.0;  // ‖A − CUR‖_F / ‖A‖_F
  bool truncated = false;       // skeleton core was rank deficient
};

CurResult build_cur(const DataMatrix& a, const std::vector<Index>& cols,
                    const std::vector<Index>& rows, CurMode mode);

/// ‖(I − CC⁺)A‖_F² / ‖A‖_F² for the listed columns.
double selection_error(const DataMatrix& a, const std::vector<Index>& cols);

struct MonitorRow {
  std::size_t r = 0;
  double residual_norm = 0.0;
  double g_star = 0.0;
  double ratio = 0.0;          // residual_norm / G*
  double squared_ratio = 0.0;  // residual_norm² / G*
};

/// Reconstruction residual against the final partition energy, one row per result.
/// Ratios are 0 when both residual and G* vanish and +inf when only G* does.
std::vector<MonitorRow> theorem1_monitor(const std::vector<SelectionResult>& results);
std::string monitor_csv(const std::vector<MonitorRow>& rows);

}  // namespace gfam
