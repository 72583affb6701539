#include "gfam/mor.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <tuple>

#include "gfam/error.hpp"
#include "json.hpp"

namespace gfam {

PdeConfig fine_grid_pde() {
  PdeConfig cfg;
  cfg.dx = 0.0125;
  return cfg;
}

PdeConfig load_pde_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("bad pde config: ") + e.what(), e.byte);
  }
  PdeConfig cfg;
  cfg.nu = j.value("nu", cfg.nu);
  cfg.dx = j.value("dx", cfg.dx);
  cfg.dt = j.value("dt", cfg.dt);
  cfg.t_final = j.value("t_final", cfg.t_final);
  cfg.newton_tol = j.value("newton_tol", cfg.newton_tol);
  cfg.newton_max = j.value("newton_max", cfg.newton_max);
  cfg.reaction = j.value("reaction", cfg.reaction);
  cfg.amplitude = j.value("amplitude", cfg.amplitude);
  return cfg;
}

std::string pde_config_to_json(const PdeConfig& cfg) {
  nlohmann::ordered_json j;
  j["nu"] = cfg.nu;
  j["dx"] = cfg.dx;
  j["dt"] = cfg.dt;
  j["t_final"] = cfg.t_final;
  j["newton_tol"] = cfg.newton_tol;
  j["newton_max"] = cfg.newton_max;
  j["reaction"] = cfg.reaction;
  j["amplitude"] = cfg.amplitude;
  return j.dump(2) + "\n";
}

Index interior_size(double dx) {
  if (!(dx > 0.0) || dx >= 1.0) throw ArgumentError("dx must lie in (0, 1)");
  const double cells = 1.0 / dx;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells) throw ArgumentError("dx must divide 1 evenly");
  return static_cast<Index>(rounded) - 1;
}

Eigen::SparseMatrix<double> laplacian_5pt(Index g) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(5 * g * g));
  auto id = [g](Index i, Index j) { return i * g + j; };
  for (Index i = 0; i < g; ++i)
    for (Index j = 0; j < g; ++j) {
      const Index p = id(i, j);
      t.emplace_back(p, p, -4.0);
      if (i > 0) t.emplace_back(p, id(i - 1, j), 1.0);
      if (i + 1 < g) t.emplace_back(p, id(i + 1, j), 1.0);
      if (j > 0) t.emplace_back(p, id(i, j - 1), 1.0);
      if (j + 1 < g) t.emplace_back(p, id(i, j + 1), 1.0);
    }
  Eigen::SparseMatrix<double> l(g * g, g * g);
  l.setFromTriplets(t.begin(), t.end());
  return l;
}

SnapshotSet simulate_snapshots(const PdeConfig& cfg) {
  if (!(cfg.nu > 0.0 && cfg.dt > 0.0 && cfg.t_final > 0.0 && cfg.newton_tol > 0.0) ||
      cfg.newton_max == 0)
    throw ArgumentError("pde parameters must be positive");
  const Index g = interior_size(cfg.dx);
  const double steps_real = cfg.t_final / cfg.dt;
  const auto steps = static_cast<Index>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
    throw ArgumentError("dt must divide t_final evenly");

  const Index dof = g * g;
  const Eigen::SparseMatrix<double> diffusion = (cfg.nu / (cfg.dx * cfg.dx)) * laplacian_5pt(g);
  Eigen::SparseMatrix<double> eye(dof, dof);
  eye.setIdentity();

  SnapshotSet out;
  out.grid_n = g;
  out.snapshots.resize(dof, steps + 1);
  Vector z(dof);
  for (Index i = 0; i < g; ++i)
    for (Index j = 0; j < g; ++j) {
      const double x = static_cast<double>(i + 1) * cfg.dx;
      const double y = static_cast<double>(j + 1) * cfg.dx;
      z(i * g + j) = cfg.amplitude * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
    }
  out.snapshots.col(0) = z;
  out.times.push_back(0.0);

  const double c = cfg.reaction;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;
  for (Index step = 1; step <= steps; ++step) {
    const Vector prev = z;
    std::size_t it = 0;
    while (true) {
      const Vector source = c * (z.array().square() - z.array().cube()).matrix();
      const Vector residual = z - cfg.dt * (diffusion * z + source) - prev;
      const double rnorm = residual.lpNorm<Eigen::Infinity>();
      if (rnorm <= cfg.newton_tol) {
        out.max_newton_residual = std::max(out.max_newton_residual, rnorm);
        break;
      }
      if (it == cfg.newton_max)
        throw ConvergenceError("newton failed at step " + std::to_string(step) + " (residual " +
                                   std::to_string(rnorm) + ")",
                               static_cast<std::size_t>(step));
      const Vector dsource = c * (2.0 * z.array() - 3.0 * z.array().square()).matrix();
      Eigen::SparseMatrix<double> jac = eye - cfg.dt * diffusion;
      for (Index p = 0; p < dof; ++p) jac.coeffRef(p, p) -= cfg.dt * dsource(p);
      if (!analyzed) {
        lu.analyzePattern(jac);
        analyzed = true;
      }
      lu.factorize(jac);
      if (lu.info() != Eigen::Success)
        throw ConvergenceError("singular newton jacobian at step " + std::to_string(step),
                               static_cast<std::size_t>(step));
      z -= lu.solve(residual);
      ++it;
    }
    out.max_newton_iterations = std::max(out.max_newton_iterations, it);
    out.snapshots.col(step) = z;
    out.times.push_back(static_cast<double>(step) * cfg.dt);
  }
  return out;
}

DataMatrix to_full_grid(const SnapshotSet& s) {
  const Index g = s.grid_n;
  const Index full = g + 2;
  DataMatrix out = DataMatrix::Zero(full * full, s.snapshots.cols());
  for (Index t = 0; t < s.snapshots.cols(); ++t)
    for (Index i = 0; i < g; ++i)
      for (Index j = 0; j < g; ++j) out((i + 1) * full + (j + 1), t) = s.snapshots(i * g + j, t);
  return out;
}

double empirical_quantile(std::vector<double> v, double p) {
  if (v.empty()) throw ArgumentError("quantile of empty set");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

Eigen::MatrixXd abs_correlations(const DataMatrix& data, CorrelationCentering centering,
                                 std::vector<std::string>* flags) {
  Eigen::MatrixXd x = data;
  if (centering == CorrelationCentering::per_vector) {
    x.rowwise() -= x.colwise().mean();
  } else {
    x.colwise() -= x.rowwise().mean();
  }
  const Eigen::VectorXd norms = x.colwise().norm().transpose();
  const Index n = x.cols();
  Eigen::MatrixXd c = (x.transpose() * x).cwiseAbs();
  for (Index i = 0; i < n; ++i) {
    if (norms(i) == 0.0) {
      c.row(i).setZero();
      c.col(i).setZero();
      if (flags) flags->push_back("correlation: snapshot " + std::to_string(i) + " has zero variance");
      continue;
    }
  }
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (norms(i) > 0.0 && norms(j) > 0.0) c(i, j) = std::min(1.0, c(i, j) / (norms(i) * norms(j)));
  for (Index i = 0; i < n; ++i) c(i, i) = norms(i) > 0.0 ? 1.0 : 0.0;
  return c;
}

Labels correlation_quantile_init(const DataMatrix& data, std::size_t k,
                                 CorrelationCentering centering, std::vector<std::string>* flags) {
  const Index n = data.cols();
  if (k == 0) throw ArgumentError("k must be positive");
  if (k == 1) return Labels(static_cast<std::size_t>(n), 0);
  if (n < 2) throw ArgumentError("correlation init needs at least two snapshots");

  const Eigen::MatrixXd c = abs_correlations(data, centering, flags);
  struct Pair {
    double c;
    Index i, j;
  };
  std::vector<Pair> pairs;
  std::vector<double> values;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      pairs.push_back({c(i, j), i, j});
      values.push_back(c(i, j));
    }
  std::vector<double> cuts;
  for (std::size_t q = 1; q < k; ++q)
    cuts.push_back(empirical_quantile(values, static_cast<double>(q) / static_cast<double>(k)));
  auto bin_of = [&](double v) {
    // left-closed bins; a value on a cut belongs to the higher bin
    return static_cast<int>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
  };

  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.c != b.c) return a.c > b.c;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  });
  Labels labels(static_cast<std::size_t>(n), -1);
  Index assigned = 0;
  for (const auto& p : pairs) {
    if (assigned + 1 >= n) break;
    auto& li = labels[static_cast<std::size_t>(p.i)];
    auto& lj = labels[static_cast<std::size_t>(p.j)];
    if (li >= 0 || lj >= 0) continue;
    li = lj = bin_of(p.c);
    assigned += 2;
  }
  for (auto& l : labels)
    if (l < 0) l = 0;  // odd leftover: smallest quantile
  return labels;
}

Eigen::MatrixXd pod_basis(const DataMatrix& snapshots, Index r) {
  return truncated_svd(snapshots, r).U;
}

namespace {

double relative_residual(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::MatrixXd& u) {
  const double nx = x.norm();
  if (nx == 0.0) return 0.0;
  if (u.cols() == 0) return 1.0;
  const Eigen::VectorXd res = x - u * (u.transpose() * x);
  return res.norm() / nx;
}

}  // namespace

MorComparison compare_pod_vs_family(const SnapshotSet& s, std::size_t r, std::size_t k_init,
                                    double tol, CorrelationCentering centering) {
  const DataMatrix& x = s.snapshots;
  if (r == 0 || static_cast<Index>(r) > std::min(x.rows(), x.cols()))
    throw ArgumentError("basis size r must lie in [1, min(m, n)]");

  FamilyConfig cfg;
  cfg.alpha = 0.0;
  cfg.k_init = k_init;
  cfg.total_dim = r;
  cfg.tol = tol;
  cfg.adaptive = true;
  cfg.fix_means_zero = true;
  cfg.init = InitKind::correlation_quantile;
  cfg.centering = centering;
  RunResult fam = run(x, cfg);

  MorComparison out;
  out.times = s.times;
  out.final_k = fam.state.k();
  out.final_dims = fam.state.dims;
  out.g_star = fam.report.energy_trace.back();
  const Eigen::MatrixXd pod = pod_basis(x, static_cast<Index>(r));
  for (Index t = 0; t < x.cols(); ++t) {
    out.pod_err.push_back(relative_residual(x.col(t), pod));
    // Voronoi rule with α = 0 and zero means: the smallest subspace residual wins.
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < fam.state.k(); ++i) {
      const double e = relative_residual(x.col(t), fam.state.bases[i]);
      if (e < best) best = e;
    }
    out.family_err.push_back(best);
  }
  const auto n = static_cast<double>(x.cols());
  for (std::size_t t = 0; t < out.pod_err.size(); ++t) {
    out.mean_pod += out.pod_err[t] / n;
    out.mean_family += out.family_err[t] / n;
  }
  out.report = std::move(fam.report);
  return out;
}

std::string comparison_csv(const MorComparison& c) {
  std::string text = "t,pod_err,family_err\n";
  char buf[96];
  for (std::size_t t = 0; t < c.times.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.times[t], c.pod_err[t], c.family_err[t]);
    text += buf;
  }
  return text;
}

}  // namespace gfam
