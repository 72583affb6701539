#include "gfam/partition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "gfam/error.hpp"
#include "gfam/mor.hpp"

namespace gfam {

namespace {

constexpr int kMaxRedraws = 100;
constexpr double kDirectionTol = 1e-12;

Eigen::MatrixXd centered_block(const DataMatrix& data, const std::vector<Index>& idx,
                               const Vector& mean) {
  Eigen::MatrixXd block = gather_columns(data, idx);
  block.colwise() -= mean;
  return block;
}

Vector set_mean(const DataMatrix& data, const std::vector<Index>& idx) {
  Vector sum = Vector::Zero(data.rows());
  for (Index j : idx) sum += data.col(j);
  return sum / static_cast<double>(idx.size());
}

}  // namespace

std::size_t budget(const FamilyConfig& cfg) {
  if (!cfg.dims.empty()) return std::accumulate(cfg.dims.begin(), cfg.dims.end(), std::size_t{0});
  return cfg.total_dim;
}

std::vector<std::size_t> split_dims(std::size_t r, std::size_t k) {
  std::vector<std::size_t> d(k, k ? r / k : 0);
  for (std::size_t i = 0; i < (k ? r % k : 0); ++i) ++d[i];
  return d;
}

void validate_config(const FamilyConfig& cfg, const DataMatrix& data) {
  const auto m = static_cast<std::size_t>(data.rows());
  const auto n = static_cast<std::size_t>(data.cols());
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) throw ArgumentError("alpha must lie in [0, 1]");
  if (!(cfg.tol > 0.0)) throw ArgumentError("tol must be positive");
  if (!(cfg.eta > 0.0)) throw ArgumentError("eta must be positive");
  if (cfg.max_iter == 0) throw ArgumentError("max_iter must be positive");
  if (cfg.k_init == 0 || cfg.k_init > n) throw ArgumentError("k_init must lie in [1, n]");
  if (!cfg.dims.empty()) {
    if (cfg.dims.size() != cfg.k_init) throw ArgumentError("explicit dims must have k_init entries");
    for (auto d : cfg.dims)
      if (d > m) throw ArgumentError("explicit dim exceeds ambient dimension");
  } else {
    for (auto d : split_dims(cfg.total_dim, cfg.k_init))
      if (d > m) throw ArgumentError("per-cluster share of total_dim exceeds ambient dimension");
  }
  if (cfg.adaptive && budget(cfg) == 0) throw ArgumentError("adaptive runs need a positive dimension budget");
  if (cfg.init == InitKind::given_labels) {
    if (cfg.initial_labels.size() != n) throw ArgumentError("initial labels must have n entries");
    for (int l : cfg.initial_labels)
      if (l < 0 || static_cast<std::size_t>(l) >= cfg.k_init)
        throw ArgumentError("initial label outside [0, k_init)");
  }
}

std::vector<std::vector<Index>> PartitionState::members() const {
  std::vector<std::vector<Index>> out(k());
  for (std::size_t j = 0; j < labels.size(); ++j)
    if (labels[j] >= 0) out[static_cast<std::size_t>(labels[j])].push_back(static_cast<Index>(j));
  return out;
}

std::vector<int> compact_clusters(PartitionState& s) {
  std::vector<std::size_t> count(s.k(), 0);
  for (int l : s.labels)
    if (l >= 0) ++count[static_cast<std::size_t>(l)];
  std::vector<int> remap(s.k(), -1);
  PartitionState out;
  out.fix_means_zero = s.fix_means_zero;
  out.flags = std::move(s.flags);
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (count[i] == 0) continue;
    remap[i] = static_cast<int>(out.means.size());
    out.means.push_back(std::move(s.means[i]));
    out.bases.push_back(std::move(s.bases[i]));
    out.dims.push_back(s.dims[i]);
    out.target_dims.push_back(s.target_dims[i]);
  }
  out.labels = std::move(s.labels);
  for (int& l : out.labels)
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  s = std::move(out);
  return remap;
}

PartitionState init_state(const DataMatrix& data, const FamilyConfig& cfg) {
  validate_config(cfg, data);
  const auto n = static_cast<std::size_t>(data.cols());
  const std::size_t k = cfg.k_init;
  PartitionState s;
  s.fix_means_zero = cfg.fix_means_zero;

  switch (cfg.init) {
    case InitKind::random_partition: {
      std::mt19937_64 rng(cfg.seed);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(k) - 1);
      bool ok = false;
      for (int attempt = 0; attempt < kMaxRedraws && !ok; ++attempt) {
        s.labels.assign(n, 0);
        std::vector<bool> seen(k, false);
        for (auto& l : s.labels) {
          l = pick(rng);
          seen[static_cast<std::size_t>(l)] = true;
        }
        ok = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
      }
      if (!ok) throw Error("random partition left a cluster empty after 100 draws");
      break;
    }
    case InitKind::given_labels: s.labels = cfg.initial_labels; break;
    case InitKind::correlation_quantile:
      s.labels = correlation_quantile_init(data, k, cfg.centering);
      break;
  }

  s.target_dims = cfg.dims.empty() ? split_dims(cfg.total_dim, k) : cfg.dims;
  s.dims.assign(k, 0);
  s.bases.assign(k, Eigen::MatrixXd(data.rows(), 0));
  s.means.assign(k, Vector::Zero(data.rows()));
  const auto before = s.k();
  compact_clusters(s);
  if (s.k() != before) s.flags.push_back("init: dropped " + std::to_string(before - s.k()) + " empty clusters");

  const auto sets = s.members();
  if (!s.fix_means_zero)
    for (std::size_t i = 0; i < s.k(); ++i) s.means[i] = set_mean(data, sets[i]);
  return centroid_update(data, std::move(s));
}

Eigen::VectorXd point_costs(const Eigen::Ref<const Eigen::MatrixXd>& points, const Vector& mean,
                            const Eigen::MatrixXd& basis, double alpha) {
  const Eigen::MatrixXd diff = points.colwise() - mean;
  Eigen::VectorXd cost = diff.colwise().squaredNorm().transpose();
  if (basis.cols() > 0 && alpha < 1.0) {
    const Eigen::MatrixXd coords = basis.transpose() * diff;
    cost -= (1.0 - alpha) * coords.colwise().squaredNorm().transpose();
  }
  return cost;
}

double cluster_energy(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                      double alpha) {
  std::vector<Index> idx;
  for (std::size_t j = 0; j < s.labels.size(); ++j)
    if (s.labels[j] == static_cast<int>(cluster)) idx.push_back(static_cast<Index>(j));
  if (idx.empty()) return 0.0;
  const Eigen::VectorXd c = point_costs(gather_columns(data, idx), s.means[cluster], s.bases[cluster], alpha);
  double sum = 0.0;
  for (Index j = 0; j < c.size(); ++j) sum += std::max(0.0, c(j));
  return sum;
}

double energy(const DataMatrix& data, const PartitionState& s, double alpha) {
  std::vector<double> per_point(static_cast<std::size_t>(data.cols()), 0.0);
  const auto sets = s.members();
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (sets[i].empty()) continue;
    const Eigen::VectorXd c = point_costs(gather_columns(data, sets[i]), s.means[i], s.bases[i], alpha);
    for (std::size_t j = 0; j < sets[i].size(); ++j)
      per_point[static_cast<std::size_t>(sets[i][j])] = std::max(0.0, c(static_cast<Index>(j)));
  }
  // fixed summation order: point index
  double sum = 0.0;
  for (double v : per_point) sum += v;
  return sum;
}

PartitionState centroid_update(const DataMatrix& data, PartitionState s) {
  const auto sets = s.members();
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (sets[i].empty()) {
      s.flags.push_back("centroid: cluster " + std::to_string(i) + " empty, basis kept");
      continue;
    }
    const auto avail = static_cast<std::size_t>(std::min<Index>(data.rows(), static_cast<Index>(sets[i].size())));
    const std::size_t want = s.target_dims[i];
    const std::size_t d = std::min(want, avail);
    if (d < want)
      s.flags.push_back("centroid: cluster " + std::to_string(i) + " dim clamped " +
                        std::to_string(want) + "->" + std::to_string(d));
    s.bases[i] = leading_left(centered_block(data, sets[i], s.means[i]), static_cast<Index>(d)).U;
    s.dims[i] = static_cast<std::size_t>(s.bases[i].cols());
  }
  return s;
}

std::vector<Direction> select_directions(const std::vector<Eigen::VectorXd>& spectra,
                                         std::size_t r) {
  double top = 0.0;
  for (const auto& sv : spectra)
    if (sv.size()) top = std::max(top, sv.maxCoeff());
  std::vector<Direction> all;
  for (std::size_t b = 0; b < spectra.size(); ++b)
    for (Index j = 0; j < spectra[b].size(); ++j)
      if (spectra[b](j) > kDirectionTol * top && spectra[b](j) > 0.0) all.push_back({spectra[b](j), b, j});
  std::stable_sort(all.begin(), all.end(), [](const Direction& a, const Direction& b) {
    if (a.sigma != b.sigma) return a.sigma > b.sigma;
    if (a.block != b.block) return a.block < b.block;
    return a.position < b.position;
  });
  if (all.size() > r) all.resize(r);
  return all;
}

PartitionState centroid_update_adaptive(const DataMatrix& data, PartitionState s, std::size_t r) {
  const auto sets = s.members();
  std::vector<LeftSpectrum> blocks(s.k());
  std::vector<Eigen::VectorXd> spectra(s.k());
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (sets[i].empty()) continue;
    blocks[i] = leading_left(centered_block(data, sets[i], s.means[i]), static_cast<Index>(r));
    spectra[i] = blocks[i].S;
  }
  const auto chosen = select_directions(spectra, r);
  if (chosen.size() < r)
    s.flags.push_back("adapt: only " + std::to_string(chosen.size()) + " of r=" + std::to_string(r) +
                      " directions available");
  std::vector<std::size_t> take(s.k(), 0);
  for (const auto& d : chosen) ++take[d.block];

  PartitionState out;
  out.fix_means_zero = s.fix_means_zero;
  out.flags = std::move(s.flags);
  std::vector<int> remap(s.k(), -1);
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (take[i] == 0) continue;
    remap[i] = static_cast<int>(out.k());
    out.means.push_back(std::move(s.means[i]));
    out.bases.push_back(blocks[i].U.leftCols(static_cast<Index>(take[i])));
    out.dims.push_back(take[i]);
    out.target_dims.push_back(take[i]);
  }
  out.labels = std::move(s.labels);
  for (int& l : out.labels)
    if (l >= 0) l = remap[static_cast<std::size_t>(l)];
  return out;
}

PartitionState voronoi_update(const DataMatrix& data, PartitionState s, double alpha,
                              EmptyPolicy policy) {
  if (s.k() == 0) throw Error("voronoi_update: no clusters");
  const Index n = data.cols();
  Eigen::VectorXd best = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<int> arg(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < s.k(); ++i) {
    const Eigen::VectorXd c = point_costs(data, s.means[i], s.bases[i], alpha);
    for (Index j = 0; j < n; ++j)
      if (c(j) < best(j)) {  // strict: ties stay with the smaller index
        best(j) = c(j);
        arg[static_cast<std::size_t>(j)] = static_cast<int>(i);
      }
  }
  s.labels = std::move(arg);
  std::vector<bool> used(s.k(), false);
  for (int l : s.labels) used[static_cast<std::size_t>(l)] = true;
  const auto empties = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
  if (empties > 0) {
    if (policy == EmptyPolicy::remove) {
      compact_clusters(s);
    } else {
      s.flags.push_back("voronoi: " + std::to_string(empties) + " empty clusters retained");
    }
  }
  return s;
}

Vector mean_gradient(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                     double alpha) {
  std::vector<Index> idx;
  for (std::size_t j = 0; j < s.labels.size(); ++j)
    if (s.labels[j] == static_cast<int>(cluster)) idx.push_back(static_cast<Index>(j));
  if (idx.empty()) return Vector::Zero(data.rows());
  const auto count = static_cast<double>(idx.size());
  const Vector delta = s.means[cluster] - set_mean(data, idx);
  const auto& u = s.bases[cluster];
  const Vector gamma_delta = delta - (1.0 - alpha) * (u * (u.transpose() * delta));
  return 2.0 * count * gamma_delta;
}

MeanStep mean_step(const DataMatrix& data, const PartitionState& s, std::size_t cluster,
                   double alpha, double eta) {
  std::vector<Index> idx;
  for (std::size_t j = 0; j < s.labels.size(); ++j)
    if (s.labels[j] == static_cast<int>(cluster)) idx.push_back(static_cast<Index>(j));
  MeanStep step;
  step.y = Vector::Zero(data.rows());
  if (idx.empty()) return step;

  const auto count = static_cast<double>(idx.size());
  const Vector& mean = s.means[cluster];
  const auto& u = s.bases[cluster];
  const double beta = 1.0 - alpha;
  const Vector delta = mean - set_mean(data, idx);
  const Vector w = u.transpose() * delta;
  const Vector proj_delta = u * w;
  step.y = 2.0 * count * (delta - beta * proj_delta);

  // ⟨Γ(x−m), y⟩ = 2|V| (⟨x−m, δ⟩ − κ⟨Uᵀ(x−m), Uᵀδ⟩), κ = 2(1−α) − (1−α)².
  // The second inner product is ⟨x−m, UUᵀδ⟩, so each point costs O(m).
  const double kappa = 2.0 * beta - beta * beta;
  double plain = 0.0;
  double projected = 0.0;
  for (Index j : idx) {
    const auto diff = data.col(j) - mean;
    plain += diff.dot(delta);
    projected += diff.dot(proj_delta);
  }
  step.xi = -2.0 * (2.0 * count * (plain - kappa * projected));

  const Vector uy = u.transpose() * step.y;
  step.zeta = count * (step.y.squaredNorm() - beta * uy.squaredNorm());
  step.gamma = step.xi < 0.0 ? 0.0 : step.xi / (step.zeta + eta * (1.0 + step.zeta));
  return step;
}

PartitionState mean_update(const DataMatrix& data, PartitionState s, double alpha, double eta) {
  if (s.fix_means_zero) return s;
  const auto sets = s.members();
  const bool closed_form = alpha == 0.0 || alpha == 1.0;
  for (std::size_t i = 0; i < s.k(); ++i) {
    if (sets[i].empty()) continue;
    if (closed_form) {
      s.means[i] = set_mean(data, sets[i]);
      continue;
    }
    const MeanStep step = mean_step(data, s, i, alpha, eta);
    if (step.gamma > 0.0) s.means[i] -= step.gamma * step.y;
  }
  return s;
}

RunResult run(const DataMatrix& data, const FamilyConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  RunResult res;
  auto& rep = res.report;
  rep.seed = cfg.seed;
  PartitionState s = init_state(data, cfg);
  const std::size_t r = budget(cfg);
  const EmptyPolicy policy = cfg.adaptive ? EmptyPolicy::remove : EmptyPolicy::keep;

  double previous = energy(data, s, cfg.alpha);
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    s = cfg.adaptive ? centroid_update_adaptive(data, std::move(s), r)
                     : centroid_update(data, std::move(s));
    s = voronoi_update(data, std::move(s), cfg.alpha, policy);
    s = mean_update(data, std::move(s), cfg.alpha, cfg.eta);
    const double g = energy(data, s, cfg.alpha);
    rep.energy_trace.push_back(g);
    rep.k_trace.push_back(s.k());
    rep.dims_trace.push_back(s.dims);
    rep.iterations = it;
    if (std::abs(g - previous) < cfg.tol) {
      rep.termination = Termination::tol_met;
      break;
    }
    previous = g;
  }
  rep.flags = s.flags;
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  res.state = std::move(s);
  return res;
}

}  // namespace gfam
