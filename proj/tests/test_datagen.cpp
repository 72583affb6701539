#include "doctest.h"

#include "gfam/datagen.hpp"
#include "gfam/error.hpp"
#include "gfam/linalg.hpp"

using namespace gfam;

namespace {

double residual_to(const Eigen::MatrixXd& basis, const Eigen::VectorXd& x) {
  return (x - basis * (basis.transpose() * x)).norm();
}

}  // namespace

TEST_CASE("blobs: zero spread, determinism, nearest-center recovery") {
  const Generated flat = gen_blobs(3, 5, 4, 0.0, 2.0, 1);
  for (Index j = 0; j < flat.data.cols(); ++j)
    CHECK(flat.data.col(j) == flat.components[static_cast<std::size_t>(flat.truth.labels[static_cast<std::size_t>(j)])]);
  for (const auto& c : flat.components) CHECK(c.norm() == doctest::Approx(2.0));

  const Generated a = gen_blobs(5, 600, 100, 1.0, 10.0, 2);
  CHECK(a.data == gen_blobs(5, 600, 100, 1.0, 10.0, 2).data);
  CHECK(a.truth.true_k == 5);
  for (Index j = 0; j < a.data.cols(); ++j) {
    int best = 0;
    for (int c = 1; c < 5; ++c)
      if ((a.data.col(j) - a.components[static_cast<std::size_t>(c)]).squaredNorm() <
          (a.data.col(j) - a.components[static_cast<std::size_t>(best)]).squaredNorm())
        best = c;
    CHECK(best == a.truth.labels[static_cast<std::size_t>(j)]);
  }
}

TEST_CASE("planes and line: membership and residual bounds") {
  const Generated clean = gen_planes_line(50, 20, 0.0, 3);
  CHECK(clean.truth.true_dims == std::vector<std::size_t>{2, 2, 1});
  CHECK(clean.data.cols() == 120);
  for (Index j = 0; j < clean.data.cols(); ++j) {
    const auto s = static_cast<std::size_t>(clean.truth.labels[static_cast<std::size_t>(j)]);
    CHECK(residual_to(clean.components[s], clean.data.col(j)) <= 1e-12);
  }
  CHECK(residual_to(clean.components[2], clean.data.col(0)) > 1e-6);

  const double noise = 0.01;
  const Generated g = gen_planes_line(250, 100, noise, 4);
  int close = 0;
  for (Index j = 0; j < g.data.cols(); ++j) {
    const auto s = static_cast<std::size_t>(g.truth.labels[static_cast<std::size_t>(j)]);
    if (residual_to(g.components[s], g.data.col(j)) <= 5 * noise) ++close;
  }
  CHECK(close >= 0.99 * static_cast<double>(g.data.cols()));
  CHECK(g.data == gen_planes_line(250, 100, noise, 4).data);
}

TEST_CASE("low rank: exact rank, flat conditioning, planted spectrum") {
  const LowRank exact = gen_lowrank_noise(40, 30, 6, 0.0, Decay::geometric, 5);
  const TruncatedSVD s = truncated_svd(exact.data, 7);
  CHECK(s.S(6) <= 1e-10 * s.S(0));

  const LowRank flat = gen_lowrank_noise(20, 20, 20, 0.0, Decay::flat, 6);
  const TruncatedSVD f = truncated_svd(flat.data, 20);
  CHECK(f.S(0) / f.S(19) == doctest::Approx(1.0).epsilon(1e-10));

  const double noise = 1e-3;
  const LowRank noisy = gen_lowrank_noise(200, 150, 20, noise, Decay::geometric, 7);
  const TruncatedSVD n = truncated_svd(noisy.data, 20);
  for (Index j = 0; j < 20; ++j)
    CHECK(std::abs(n.S(j) - noisy.sigma(j)) <= noise * std::sqrt(350.0) * 3.0);

  CHECK_THROWS_AS((void)gen_lowrank_noise(5, 4, 5, 0.0, Decay::flat, 1), ArgumentError);
}

TEST_CASE("clustered low rank: labels follow blocks") {
  const Generated g = gen_clustered_lowrank(30, 3, 10, 2, 0.0, 8);
  CHECK(g.truth.true_k == 3);
  for (std::size_t j = 0; j < 30; ++j) CHECK(g.truth.labels[j] == static_cast<int>(j / 10));
  const TruncatedSVD s = truncated_svd(g.data.middleCols(10, 10), 3);
  CHECK(s.S(2) <= 1e-10 * s.S(0));
}
