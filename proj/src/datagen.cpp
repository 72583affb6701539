#include "gfam/datagen.hpp"

#include <cmath>
#include <random>

#include "gfam/error.hpp"

namespace gfam {

namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  return g;
}

Eigen::MatrixXd orthonormal(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, rows, cols));
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace

Generated gen_blobs(std::size_t k, std::size_t ambient, std::size_t per_cluster, double spread,
                    double separation, std::uint64_t seed) {
  if (k == 0 || ambient == 0 || per_cluster == 0) throw ArgumentError("gen_blobs: counts must be positive");
  std::mt19937_64 rng(seed);
  const auto m = static_cast<Eigen::Index>(ambient);
  Generated g;
  g.data.resize(m, static_cast<Eigen::Index>(k * per_cluster));
  g.truth.true_k = k;
  g.truth.true_dims.assign(k, 0);
  Eigen::Index col = 0;
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd center = gaussian(rng, m, 1);
    center *= separation / center.norm();
    g.components.push_back(center);
    const Eigen::MatrixXd noise = gaussian(rng, m, static_cast<Eigen::Index>(per_cluster));
    for (std::size_t p = 0; p < per_cluster; ++p, ++col) {
      g.data.col(col) = center + spread * noise.col(static_cast<Eigen::Index>(p));
      g.truth.labels.push_back(static_cast<int>(c));
    }
  }
  return g;
}

Generated gen_planes_line(std::size_t n_plane, std::size_t n_line, double noise, std::uint64_t seed) {
  if (n_plane == 0 || n_line == 0) throw ArgumentError("gen_planes_line: counts must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  Generated g;
  g.truth.true_k = 3;
  g.truth.true_dims = {2, 2, 1};
  g.components = {orthonormal(rng, 3, 2), orthonormal(rng, 3, 2), orthonormal(rng, 3, 1)};
  const std::size_t counts[3] = {n_plane, n_plane, n_line};
  g.data.resize(3, static_cast<Eigen::Index>(2 * n_plane + n_line));
  Eigen::Index col = 0;
  for (int s = 0; s < 3; ++s) {
    const auto& basis = g.components[static_cast<std::size_t>(s)];
    for (std::size_t p = 0; p < counts[s]; ++p, ++col) {
      Eigen::VectorXd a(basis.cols());
      for (Eigen::Index j = 0; j < a.size(); ++j) a(j) = coef(rng);
      Eigen::Vector3d e;
      for (int j = 0; j < 3; ++j) e(j) = noise * jitter(rng);
      g.data.col(col) = basis * a + e;
      g.truth.labels.push_back(s);
    }
  }
  return g;
}

LowRank gen_lowrank_noise(std::size_t m, std::size_t n, std::size_t rank, double noise, Decay decay,
                          std::uint64_t seed) {
  if (rank == 0 || rank > std::min(m, n)) throw ArgumentError("gen_lowrank_noise: rank must lie in [1, min(m, n)]");
  std::mt19937_64 rng(seed);
  const auto mm = static_cast<Eigen::Index>(m);
  const auto nn = static_cast<Eigen::Index>(n);
  const auto rr = static_cast<Eigen::Index>(rank);
  const Eigen::MatrixXd u = orthonormal(rng, mm, rr);
  const Eigen::MatrixXd v = orthonormal(rng, nn, rr);
  LowRank out;
  out.sigma.resize(rr);
  for (Eigen::Index j = 0; j < rr; ++j)
    out.sigma(j) = decay == Decay::flat ? 1.0 : std::pow(0.8, static_cast<double>(j));
  out.data = u * out.sigma.asDiagonal() * v.transpose();
  if (noise != 0.0) out.data += noise * gaussian(rng, mm, nn);
  return out;
}

Generated gen_clustered_lowrank(std::size_t m, std::size_t blocks, std::size_t cols_per_block,
                                std::size_t rank, double noise, std::uint64_t seed) {
  if (blocks == 0) throw ArgumentError("gen_clustered_lowrank: need at least one block");
  Generated g;
  g.truth.true_k = blocks;
  g.truth.true_dims.assign(blocks, rank);
  g.data.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(blocks * cols_per_block));
  for (std::size_t b = 0; b < blocks; ++b) {
    const LowRank lr = gen_lowrank_noise(m, cols_per_block, rank, noise, Decay::geometric,
                                         seed * 1000003ULL + b);
    g.data.middleCols(static_cast<Eigen::Index>(b * cols_per_block),
                      static_cast<Eigen::Index>(cols_per_block)) = lr.data;
    g.truth.labels.insert(g.truth.labels.end(), cols_per_block, static_cast<int>(b));
  }
  return g;
}

}  // namespace gfam
