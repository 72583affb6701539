#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gfam/matio.hpp"

namespace gfam {

using Index = Eigen::Index;

/// Leading singular triplets: U is m×d column-orthonormal, S descending, Vt is d×n.
struct TruncatedSVD {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd Vt;
};

enum class PivotKind { cpqr, lupp };

struct PivotedFactorization {
  PivotKind kind = PivotKind::cpqr;
  std::vector<Index> pivot_indices;  // selection order
  bool rank_deficient = false;       // fewer than the requested pivots were found
};

/// Top-d singular triplets. Requires 1 <= d <= min(rows, cols).
TruncatedSVD truncated_svd(const DataMatrix& m, Index d);

/// Leading left singular vectors/values of `m`, at most `max_dims` of them and
/// never more than min(rows, cols). `max_dims` may be 0.
struct LeftSpectrum {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
};
LeftSpectrum leading_left(const Eigen::Ref<const Eigen::MatrixXd>& m, Index max_dims);

/// G·M with G ∈ R^{target_dim×rows}, entries iid N(0, 1/target_dim), drawn row-major.
DataMatrix gaussian_embed(const DataMatrix& m, Index target_dim, std::uint64_t seed);

/// Column selection by greedy pivoting. Ties go to the lowest column index.
/// Stops early (rank_deficient=true) when every remaining pivot candidate is
/// at most 1e-12 relative to the largest initial column/entry.
PivotedFactorization pivoted_factorize(const DataMatrix& m, PivotKind kind, Index r);

/// C⁺A via SVD of C, discarding singular values <= 1e-12·‖C‖₂.
Eigen::MatrixXd pseudo_apply(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a);

/// Moore-Penrose pseudoinverse with the same truncation rule.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& c);

/// Number of singular values above 1e-12·‖C‖₂.
Index numerical_rank(const Eigen::MatrixXd& c);

/// (I - CC⁺)A.
Eigen::MatrixXd projection_residual(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a);

/// Columns of `m` listed in `idx`, in order.
Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, const std::vector<Index>& idx);
Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<Index>& idx);

}  // namespace gfam
