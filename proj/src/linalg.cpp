#include "gfam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "gfam/error.hpp"

namespace gfam {

namespace {

constexpr double kRankTol = 1e-12;

struct ThinSVD {
  Eigen::MatrixXd U;
  Eigen::VectorXd S;
  Eigen::MatrixXd V;
};

ThinSVD thin_svd(const Eigen::Ref<const Eigen::MatrixXd>& m, bool want_v) {
  unsigned opts = Eigen::ComputeThinU;
  if (want_v) opts |= Eigen::ComputeThinV;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, opts);
  ThinSVD out;
  out.U = svd.matrixU();
  out.S = svd.singularValues();
  if (want_v) out.V = svd.matrixV();
  return out;
}

Index rank_of(const Eigen::VectorXd& s) {
  if (s.size() == 0 || s(0) <= 0.0) return 0;
  const double cut = kRankTol * s(0);
  Index r = 0;
  while (r < s.size() && s(r) > cut) ++r;
  return r;
}

}  // namespace

TruncatedSVD truncated_svd(const DataMatrix& m, Index d) {
  const Index cap = std::min(m.rows(), m.cols());
  if (d < 1 || d > cap)
    throw ArgumentError("truncated_svd: d=" + std::to_string(d) + " outside [1, " +
                        std::to_string(cap) + "]");
  const ThinSVD svd = thin_svd(m, true);
  return {svd.U.leftCols(d), svd.S.head(d), svd.V.leftCols(d).transpose()};
}

LeftSpectrum leading_left(const Eigen::Ref<const Eigen::MatrixXd>& m, Index max_dims) {
  const Index d = std::clamp<Index>(max_dims, 0, std::min(m.rows(), m.cols()));
  if (d == 0) return {Eigen::MatrixXd(m.rows(), 0), Eigen::VectorXd(0)};
  const ThinSVD svd = thin_svd(m, false);
  return {svd.U.leftCols(d), svd.S.head(d)};
}

DataMatrix gaussian_embed(const DataMatrix& m, Index target_dim, std::uint64_t seed) {
  if (target_dim < 1 || target_dim > m.rows())
    throw ArgumentError("gaussian_embed: target_dim must lie in [1, rows]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(target_dim)));
  Eigen::MatrixXd g(target_dim, m.rows());
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j) g(i, j) = normal(rng);
  return g * m;
}

PivotedFactorization pivoted_factorize(const DataMatrix& m, PivotKind kind, Index r) {
  const Index cap = std::min(m.rows(), m.cols());
  if (r < 0 || r > cap) throw ArgumentError("pivoted_factorize: r exceeds min(rows, cols)");
  PivotedFactorization out;
  out.kind = kind;
  out.pivot_indices.reserve(static_cast<std::size_t>(r));

  if (kind == PivotKind::cpqr) {
    Eigen::MatrixXd res = m;
    Eigen::VectorXd norms = res.colwise().norm();
    const double cut = kRankTol * (norms.size() ? norms.maxCoeff() : 0.0);
    std::vector<bool> taken(static_cast<std::size_t>(m.cols()), false);
    while (static_cast<Index>(out.pivot_indices.size()) < r) {
      Index best = -1;
      double best_norm = cut;
      for (Index j = 0; j < res.cols(); ++j)
        if (!taken[j] && norms(j) > best_norm) {
          best = j;
          best_norm = norms(j);
        }
      if (best < 0) {
        out.rank_deficient = true;
        break;
      }
      taken[best] = true;
      out.pivot_indices.push_back(best);
      const Eigen::VectorXd q = res.col(best) / res.col(best).norm();
      // Two passes keep the residual orthogonal to the selected columns.
      for (int pass = 0; pass < 2; ++pass) res.noalias() -= q * (q.transpose() * res);
      res.col(best).setZero();
      norms = res.colwise().norm();
    }
    return out;
  }

  // LUPP on Mᵀ: rows of W are columns of M.
  Eigen::MatrixXd w = m.transpose();
  const double cut = kRankTol * (w.size() ? w.cwiseAbs().maxCoeff() : 0.0);
  std::vector<bool> taken(static_cast<std::size_t>(w.rows()), false);
  for (Index j = 0; j < w.cols() && static_cast<Index>(out.pivot_indices.size()) < r; ++j) {
    Index p = -1;
    double best = cut;
    for (Index i = 0; i < w.rows(); ++i)
      if (!taken[i] && std::abs(w(i, j)) > best) {
        p = i;
        best = std::abs(w(i, j));
      }
    if (p < 0) continue;  // column of the Schur complement vanished
    taken[p] = true;
    out.pivot_indices.push_back(p);
    const double piv = w(p, j);
    for (Index i = 0; i < w.rows(); ++i) {
      if (taken[i]) continue;
      const double l = w(i, j) / piv;
      if (l != 0.0) w.row(i).tail(w.cols() - j) -= l * w.row(p).tail(w.cols() - j);
    }
  }
  out.rank_deficient = static_cast<Index>(out.pivot_indices.size()) < r;
  return out;
}

Eigen::MatrixXd pseudo_apply(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a) {
  if (c.rows() != a.rows()) throw ArgumentError("pseudo_apply: row mismatch");
  if (c.cols() == 0) return Eigen::MatrixXd(0, a.cols());
  const ThinSVD svd = thin_svd(c, true);
  const Index k = rank_of(svd.S);
  if (k == 0) return Eigen::MatrixXd::Zero(c.cols(), a.cols());
  Eigen::MatrixXd coef = svd.U.leftCols(k).transpose() * a;
  coef = svd.S.head(k).cwiseInverse().asDiagonal() * coef;
  return svd.V.leftCols(k) * coef;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& c) {
  return pseudo_apply(c, Eigen::MatrixXd::Identity(c.rows(), c.rows()));
}

Index numerical_rank(const Eigen::MatrixXd& c) {
  if (c.size() == 0) return 0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(c);
  return rank_of(svd.singularValues());
}

Eigen::MatrixXd projection_residual(const Eigen::MatrixXd& c, const Eigen::MatrixXd& a) {
  if (c.cols() == 0) return a;
  const ThinSVD svd = thin_svd(c, false);
  const Index k = rank_of(svd.S);
  const auto q = svd.U.leftCols(k);
  Eigen::MatrixXd res = a - q * (q.transpose() * a);
  return res;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd& m, const std::vector<Index>& idx) {
  Eigen::MatrixXd out(m.rows(), static_cast<Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Index>(j)) = m.col(idx[j]);
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<Index>& idx) {
  Eigen::MatrixXd out(static_cast<Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Index>(i)) = m.row(idx[i]);
  return out;
}

}  // namespace gfam
