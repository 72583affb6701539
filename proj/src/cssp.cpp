#include "gfam/cssp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "gfam/error.hpp"

namespace gfam {

namespace {

constexpr double kDeimTol = 1e-12;

Index argmax_abs(const Eigen::VectorXd& v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  return best;
}

}  // namespace

std::string to_string(CsspMethod m) {
  switch (m) {
    case CsspMethod::deim: return "deim";
    case CsspMethod::cpqr: return "cpqr";
    case CsspMethod::lupp: return "lupp";
  }
  return "?";
}

CsspMethod parse_method(const std::string& s) {
  if (s == "deim") return CsspMethod::deim;
  if (s == "cpqr") return CsspMethod::cpqr;
  if (s == "lupp") return CsspMethod::lupp;
  throw ArgumentError("unknown CSSP method '" + s + "'");
}

std::vector<Index> deim_indices(const Eigen::MatrixXd& basis, bool* deficient) {
  std::vector<Index> p;
  if (deficient) *deficient = false;
  if (basis.cols() == 0) return p;
  const double scale = basis.cwiseAbs().maxCoeff();
  p.push_back(argmax_abs(basis.col(0)));
  for (Index j = 1; j < basis.cols(); ++j) {
    Eigen::MatrixXd sub(j, j);
    Eigen::VectorXd rhs(j);
    for (Index a = 0; a < j; ++a) {
      sub.row(a) = basis.row(p[static_cast<std::size_t>(a)]).head(j);
      rhs(a) = basis(p[static_cast<std::size_t>(a)], j);
    }
    const Eigen::VectorXd c = sub.partialPivLu().solve(rhs);
    const Eigen::VectorXd res = basis.col(j) - basis.leftCols(j) * c;
    const Index next = argmax_abs(res);
    if (!(std::abs(res(next)) > kDeimTol * scale) ||
        std::find(p.begin(), p.end(), next) != p.end()) {
      if (deficient) *deficient = true;
      break;
    }
    p.push_back(next);
  }
  return p;
}

std::vector<Index> select_indices(const Eigen::MatrixXd& a, Index r, CsspMethod method,
                                  bool* deficient) {
  if (deficient) *deficient = false;
  if (r == 0) return {};
  if (method == CsspMethod::deim) {
    const TruncatedSVD svd = truncated_svd(a, r);
    return deim_indices(svd.Vt.transpose(), deficient);
  }
  const auto f = pivoted_factorize(a, method == CsspMethod::cpqr ? PivotKind::cpqr : PivotKind::lupp, r);
  if (deficient) *deficient = f.rank_deficient;
  return f.pivot_indices;
}

double selection_error(const DataMatrix& a, const std::vector<Index>& cols) {
  const double total = a.squaredNorm();
  if (total == 0.0) return 0.0;
  const double res = projection_residual(gather_columns(a, cols), a).squaredNorm();
  return std::clamp(res / total, 0.0, 1.0);
}

namespace {

void finish(SelectionResult& out, const DataMatrix& a) {
  out.relative_error = selection_error(a, out.col_indices);
  out.residual_norm = std::sqrt(out.relative_error * a.squaredNorm());
}

}  // namespace

SelectionResult select_columns(const DataMatrix& a, Index r, CsspMethod method) {
  if (r < 1 || r > std::min(a.rows(), a.cols()))
    throw ArgumentError("select_columns: r must lie in [1, min(m, n)]");
  SelectionResult out;
  out.method = method;
  out.col_indices = select_indices(a, r, method, &out.rank_deficient);
  finish(out, a);
  return out;
}

SelectionResult partitioned_select(const DataMatrix& a, Index r, std::size_t k_init,
                                   CsspMethod method, PairingVariant variant, std::uint64_t seed,
                                   const PairingOptions& opts) {
  if (r < 1 || r > std::min(a.rows(), a.cols()))
    throw ArgumentError("partitioned_select: r must lie in [1, min(m, n)]");
  FamilyConfig cfg;
  cfg.alpha = 0.0;
  cfg.k_init = k_init;
  cfg.total_dim = static_cast<std::size_t>(r);
  cfg.adaptive = true;
  cfg.fix_means_zero = variant == PairingVariant::cvod_based;
  cfg.seed = seed;
  cfg.tol = opts.tol;
  cfg.max_iter = opts.max_iter;
  const RunResult fam = run(a, cfg);
  const auto& st = fam.state;
  const auto sets = st.members();

  SelectionResult out;
  out.method = method;
  out.paired = true;
  out.g_star = fam.report.energy_trace.back();
  out.cluster_dims = st.dims;

  std::vector<Eigen::MatrixXd> blocks(st.k());
  std::set<Index> seen;
  for (std::size_t i = 0; i < st.k(); ++i) {
    blocks[i] = gather_columns(a, sets[i]);
    if (variant == PairingVariant::vqpca_based) blocks[i].colwise() -= st.means[i];
    const auto d = std::min<Index>(static_cast<Index>(st.dims[i]),
                                   std::min(blocks[i].rows(), blocks[i].cols()));
    bool deficient = false;
    for (Index local : select_indices(blocks[i], d, method, &deficient)) {
      const Index global = sets[i][static_cast<std::size_t>(local)];
      if (seen.insert(global).second) out.col_indices.push_back(global);
    }
    out.rank_deficient = out.rank_deficient || deficient;
  }

  // Backfill a shortfall from the cluster holding the most energy.
  const auto want = static_cast<std::size_t>(r);
  if (out.col_indices.size() < want && st.k() > 0) {
    std::size_t big = 0;
    for (std::size_t i = 1; i < st.k(); ++i)
      if (blocks[i].squaredNorm() > blocks[big].squaredNorm()) big = i;
    const Index extra = std::min<Index>(static_cast<Index>(st.dims[big] + want - out.col_indices.size()),
                                        std::min(blocks[big].rows(), blocks[big].cols()));
    for (Index local : select_indices(blocks[big], extra, method)) {
      if (out.col_indices.size() >= want) break;
      const Index global = sets[big][static_cast<std::size_t>(local)];
      if (seen.insert(global).second) out.col_indices.push_back(global);
    }
  }
  finish(out, a);
  return out;
}

CurResult build_cur(const DataMatrix& a, const std::vector<Index>& cols,
                    const std::vector<Index>& rows, CurMode mode) {
  if (cols.empty() || rows.empty()) throw ArgumentError("build_cur: index sets must be nonempty");
  for (Index c : cols)
    if (c < 0 || c >= a.cols()) throw ArgumentError("build_cur: column index out of range");
  for (Index r : rows)
    if (r < 0 || r >= a.rows()) throw ArgumentError("build_cur: row index out of range");
  CurResult out;
  out.C = gather_columns(a, cols);
  out.R = gather_rows(a, rows);
  if (mode == CurMode::pseudo) {
    const Eigen::MatrixXd left = pseudo_apply(out.C, a);  // C⁺A
    out.U = pseudo_apply(out.R.transpose(), left.transpose()).transpose();
  } else {
    const Eigen::MatrixXd core = gather_columns(gather_rows(a, rows), cols);
    out.U = pseudo_inverse(core);
    out.truncated = numerical_rank(core) < std::min(core.rows(), core.cols());
  }
  const double norm = a.norm();
  out.relative_error = norm == 0.0 ? 0.0 : (a - out.C * out.U * out.R).norm() / norm;
  return out;
}

std::vector<MonitorRow> theorem1_monitor(const std::vector<SelectionResult>& results) {
  std::vector<MonitorRow> rows;
  for (const auto& res : results) {
    MonitorRow row;
    row.r = res.col_indices.size();
    row.residual_norm = res.residual_norm;
    row.g_star = res.g_star.value_or(0.0);
    if (row.g_star > 0.0) {
      row.ratio = row.residual_norm / row.g_star;
      row.squared_ratio = row.residual_norm * row.residual_norm / row.g_star;
    } else if (row.residual_norm > 0.0) {
      row.ratio = row.squared_ratio = std::numeric_limits<double>::infinity();
    }
    rows.push_back(row);
  }
  return rows;
}

std::string monitor_csv(const std::vector<MonitorRow>& rows) {
  std::string text = "r,residual_norm,g_star,ratio,squared_ratio\n";
  char buf[160];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", row.r, row.residual_norm,
                  row.g_star, row.ratio, row.squared_ratio);
    text += buf;
  }
  return text;
}

}  // namespace gfam
