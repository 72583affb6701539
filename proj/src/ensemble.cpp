#include "gfam/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <thread>

#include "gfam/error.hpp"

namespace gfam {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Runs job(b) for b in [0, runs) on up to `threads` workers. The first failure
// (lowest run index) is rethrown after all workers finish.
template <typename Job>
void for_each_run(std::size_t runs, std::size_t threads, Job job) {
  threads = std::max<std::size_t>(1, std::min(threads, runs));
  std::vector<std::exception_ptr> errors(runs);
  auto worker = [&](std::size_t w) {
    for (std::size_t b = w; b < runs; b += threads) {
      try {
        job(b, w);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (std::size_t b = 0; b < runs; ++b) {
    if (!errors[b]) continue;
    try {
      std::rethrow_exception(errors[b]);
    } catch (const std::exception& e) {
      throw Error("ensemble run " + std::to_string(b) + " failed: " + e.what());
    }
  }
}

Labels kmeanspp_labels(const DataMatrix& x, std::size_t k, std::mt19937_64& rng) {
  const Index n = x.cols();
  std::vector<Index> centers;
  std::uniform_int_distribution<Index> first(0, n - 1);
  centers.push_back(first(rng));
  Eigen::VectorXd d2 = (x.colwise() - x.col(centers[0])).colwise().squaredNorm().transpose();
  while (centers.size() < k) {
    const double total = d2.sum();
    Index next = 0;
    if (total <= 0.0) {
      // all remaining points coincide with a center; take the first non-center
      while (std::find(centers.begin(), centers.end(), next) != centers.end()) ++next;
    } else {
      std::uniform_real_distribution<double> u(0.0, total);
      double target = u(rng);
      Index last_positive = 0;
      for (next = 0; next < n; ++next) {
        if (d2(next) <= 0.0) continue;
        last_positive = next;
        target -= d2(next);
        if (target < 0.0) break;
      }
      if (next == n) next = last_positive;
    }
    centers.push_back(next);
    d2 = d2.cwiseMin((x.colwise() - x.col(next)).colwise().squaredNorm().transpose());
  }
  Labels labels(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      const double d = (x.col(j) - x.col(centers[c])).squaredNorm();
      if (d < best) {
        best = d;
        labels[static_cast<std::size_t>(j)] = static_cast<int>(c);
      }
    }
  }
  return labels;
}

Labels first_appearance_order(const Labels& labels) {
  std::vector<int> map;
  Labels out(labels.size());
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const auto l = static_cast<std::size_t>(labels[j]);
    if (l >= map.size()) map.resize(l + 1, -1);
    if (map[l] < 0) map[l] = static_cast<int>(std::count_if(map.begin(), map.end(), [](int v) { return v >= 0; }));
    out[j] = map[l];
  }
  return out;
}

}  // namespace

FamilyConfig kest_config(std::size_t k_init, std::size_t total_dim, std::uint64_t seed) {
  FamilyConfig cfg;
  cfg.alpha = 0.5;
  cfg.tol = 0.1;
  cfg.adaptive = true;
  cfg.k_init = k_init;
  cfg.total_dim = total_dim;
  cfg.seed = seed;
  return cfg;
}

FamilyConfig affinity_config(std::size_t k_init, std::size_t total_dim, std::uint64_t seed) {
  FamilyConfig cfg = kest_config(k_init, total_dim, seed);
  cfg.alpha = 0.0;
  cfg.tol = 0.01;
  return cfg;
}

CoAssociation run_ensemble(const DataMatrix& data, const FamilyConfig& cfg, std::size_t runs,
                           std::size_t threads) {
  if (runs == 0) throw ArgumentError("ensemble needs at least one run");
  const auto n = static_cast<std::size_t>(data.cols());
  threads = std::max<std::size_t>(1, std::min(threads, runs));
  std::vector<std::vector<std::uint32_t>> counts(threads, std::vector<std::uint32_t>(n * n, 0));
  for_each_run(runs, threads, [&](std::size_t b, std::size_t w) {
    FamilyConfig c = cfg;
    c.seed = run_seed(cfg.seed, b);
    const Labels labels = run(data, c).state.labels;
    auto& cnt = counts[w];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        if (labels[i] == labels[j]) ++cnt[i * n + j];
  });
  CoAssociation out;
  out.runs = runs;
  out.a.resize(static_cast<Index>(n), static_cast<Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      std::uint64_t total = 0;
      for (const auto& cnt : counts) total += cnt[i * n + j];
      const double v = static_cast<double>(total) / static_cast<double>(runs);
      out.a(static_cast<Index>(i), static_cast<Index>(j)) = v;
      out.a(static_cast<Index>(j), static_cast<Index>(i)) = v;
    }
  return out;
}

CoAssociation threshold_topq(const CoAssociation& in, std::size_t q, ThresholdMode mode) {
  const Index n = in.a.rows();
  if (q == 0 || static_cast<Index>(q) > n) throw ArgumentError("q must lie in [1, n]");
  const Eigen::MatrixXd& a = in.a;
  // keep_row(i, j): a_ij is among the q largest of row i; ties favor the lower partner index.
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> keep_row(n, n), keep_col(n, n);
  keep_row.setConstant(false);
  keep_col.setConstant(false);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(i, x) > a(i, y); });
    for (std::size_t t = 0; t < q; ++t) keep_row(i, order[t]) = true;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return a(x, i) > a(y, i); });
    for (std::size_t t = 0; t < q; ++t) keep_col(order[t], i) = true;
  }
  CoAssociation out = in;
  out.q = q;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const bool keep = mode == ThresholdMode::row_or_column ? (keep_row(i, j) || keep_col(i, j))
                                                             : (keep_row(i, j) && keep_col(i, j));
      if (!keep) out.a(i, j) = 0.0;
    }
  return out;
}

Labels kmeans(const DataMatrix& points, std::size_t k, std::uint64_t seed, std::size_t restarts) {
  const auto n = static_cast<std::size_t>(points.cols());
  if (k == 0 || k > n) throw ArgumentError("kmeans: k must lie in [1, n]");
  if (k == 1) return Labels(n, 0);
  Labels best;
  double best_energy = std::numeric_limits<double>::infinity();
  for (std::size_t rs = 0; rs < restarts; ++rs) {
    std::mt19937_64 rng(splitmix(seed + rs));
    FamilyConfig cfg;
    cfg.alpha = 1.0;
    cfg.k_init = k;
    cfg.dims.assign(k, 0);
    cfg.tol = 1e-12;
    cfg.max_iter = 100;
    cfg.init = InitKind::given_labels;
    cfg.initial_labels = kmeanspp_labels(points, k, rng);
    const RunResult res = run(points, cfg);
    const double e = energy(points, res.state, 1.0);
    if (e < best_energy) {
      best_energy = e;
      best = res.state.labels;
    }
  }
  return best;
}

Labels spectral_cluster(const CoAssociation& aff, std::size_t k, std::uint64_t seed) {
  const Index n = aff.a.rows();
  if (k == 0 || static_cast<Index>(k) > n) throw ArgumentError("spectral_cluster: k must lie in [1, n]");
  if (k == 1) return Labels(static_cast<std::size_t>(n), 0);

  const Eigen::VectorXd degree = aff.a.rowwise().sum();
  std::vector<Index> active;
  for (Index i = 0; i < n; ++i)
    if (degree(i) > 0.0) active.push_back(i);
  const auto na = static_cast<Index>(active.size());
  Labels labels(static_cast<std::size_t>(n), 0);
  if (na == 0) return labels;

  Eigen::MatrixXd m(na, na);
  for (Index i = 0; i < na; ++i)
    for (Index j = 0; j < na; ++j)
      m(i, j) = aff.a(active[i], active[j]) / std::sqrt(degree(active[i]) * degree(active[j]));
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Index kk = std::min<Index>(static_cast<Index>(k), na);
  Eigen::MatrixXd emb = eig.eigenvectors().rightCols(kk).rowwise().reverse();
  for (Index i = 0; i < na; ++i) {
    const double norm = emb.row(i).norm();
    if (norm > 0.0) emb.row(i) /= norm;
  }
  const Labels sub = kmeans(emb.transpose(), static_cast<std::size_t>(kk), seed);
  for (Index i = 0; i < na; ++i) labels[static_cast<std::size_t>(active[i])] = sub[static_cast<std::size_t>(i)];

  // Isolated nodes join the cluster they have the most affinity with (cluster 0 on ties).
  for (Index i = 0; i < n; ++i) {
    if (degree(i) > 0.0) continue;
    std::vector<double> pull(static_cast<std::size_t>(kk), 0.0);
    for (Index j : active) pull[static_cast<std::size_t>(labels[static_cast<std::size_t>(j)])] += aff.a(i, j);
    labels[static_cast<std::size_t>(i)] =
        static_cast<int>(std::max_element(pull.begin(), pull.end()) - pull.begin());
  }
  return first_appearance_order(labels);
}

std::size_t estimate_k(const DataMatrix& data, const FamilyConfig& cfg, std::size_t runs,
                       std::size_t threads, std::vector<std::size_t>* finals) {
  if (runs == 0) throw ArgumentError("estimate_k needs at least one run");
  std::vector<std::size_t> ks(runs, 0);
  for_each_run(runs, threads, [&](std::size_t b, std::size_t) {
    FamilyConfig c = cfg;
    c.seed = run_seed(cfg.seed, b);
    ks[b] = run(data, c).state.k();
  });
  const double mean = static_cast<double>(std::accumulate(ks.begin(), ks.end(), std::size_t{0})) /
                      static_cast<double>(runs);
  if (finals) *finals = ks;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(mean)));
}

EnsembleResult ensemble_pipeline(const DataMatrix& data, const FamilyConfig& cfg_kest,
                                 const FamilyConfig& cfg_affinity, std::size_t runs, std::size_t q,
                                 ThresholdMode mode, std::size_t threads) {
  EnsembleResult out;
  out.k_hat = estimate_k(data, cfg_kest, runs, threads, &out.kest_finals);
  CoAssociation aff = run_ensemble(data, cfg_affinity, runs, threads);
  out.affinity = static_cast<Index>(q) < aff.a.rows() ? threshold_topq(aff, q, mode) : aff;
  out.affinity.q = q;
  out.labels = spectral_cluster(out.affinity, std::min<std::size_t>(out.k_hat, static_cast<std::size_t>(data.cols())),
                                cfg_affinity.seed);
  return out;
}

}  // namespace gfam
