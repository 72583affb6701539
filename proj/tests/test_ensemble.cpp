#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "gfam/datagen.hpp"
#include "gfam/ensemble.hpp"
#include "gfam/error.hpp"
#include "gfam/metrics.hpp"
#include "helpers.hpp"

using namespace gfam;

namespace {

// Top-q of a row by value, ties to the lower index, found by exhaustive counting.
bool in_top_q(const Eigen::VectorXd& v, Index j, std::size_t q) {
  std::size_t ahead = 0;
  for (Index t = 0; t < v.size(); ++t)
    if (v(t) > v(j) || (v(t) == v(j) && t < j)) ++ahead;
  return ahead < q;
}

CoAssociation random_symmetric(Index n, std::uint64_t seed) {
  const Eigen::MatrixXd g = testing::randn(n, n, seed).cwiseAbs();
  Eigen::MatrixXd m = 0.5 * (g + g.transpose());
  m /= m.maxCoeff();
  m.diagonal().setOnes();
  CoAssociation c;
  c.a = m;
  c.runs = 1;
  return c;
}

double error_by_permutation(const Labels& pred, const Labels& truth, int k) {
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t best = 0;
  do {
    std::size_t hit = 0;
    for (std::size_t j = 0; j < pred.size(); ++j)
      if (perm[static_cast<std::size_t>(pred[j])] == truth[j]) ++hit;
    best = std::max(best, hit);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return 1.0 - static_cast<double>(best) / static_cast<double>(pred.size());
}

}  // namespace

TEST_CASE("adjusted rand index on hand examples") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {5, 5, 2, 2}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
}

TEST_CASE("clustering error matches a permutation search") {
  CHECK(clustering_error({0, 0, 1, 1, 1}, {1, 1, 0, 0, 2}) == doctest::Approx(0.2));
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 30; ++trial) {
    Labels p(25), t(25);
    for (auto& v : p) v = static_cast<int>(rng() % 4);
    for (auto& v : t) v = static_cast<int>(rng() % 4);
    CHECK(clustering_error(p, t) == doctest::Approx(error_by_permutation(p, t, 4)).epsilon(1e-12));
  }
}

TEST_CASE("threshold: q = n is the identity, brute-force oracle, symmetry") {
  const CoAssociation a = random_symmetric(20, 2);
  CHECK(threshold_topq(a, 20).a == a.a);
  CHECK_THROWS_AS((void)threshold_topq(a, 0), ArgumentError);
  CHECK_THROWS_AS((void)threshold_topq(a, 21), ArgumentError);

  for (std::uint64_t seed = 3; seed < 8; ++seed) {
    const CoAssociation in = random_symmetric(20, seed);
    for (std::size_t q : {1u, 5u, 9u}) {
      const CoAssociation out = threshold_topq(in, q);
      const CoAssociation both = threshold_topq(in, q, ThresholdMode::row_and_column);
      for (Index i = 0; i < 20; ++i) {
        Index kept = 0;
        for (Index j = 0; j < 20; ++j) {
          const bool row = in_top_q(in.a.row(i).transpose(), j, q);
          const bool col = in_top_q(in.a.col(j), i, q);
          CHECK(out.a(i, j) == ((row || col) ? in.a(i, j) : 0.0));
          CHECK(both.a(i, j) == ((row && col) ? in.a(i, j) : 0.0));
          if (out.a(i, j) != 0.0) ++kept;
        }
        CHECK(kept >= static_cast<Index>(q));
      }
      CHECK(out.a == out.a.transpose());
    }
  }
}

TEST_CASE("spectral clustering recovers exact blocks") {
  const std::vector<int> sizes{4, 7, 3};
  const Index n = 14;
  CoAssociation a;
  a.a = Eigen::MatrixXd::Zero(n, n);
  Labels truth;
  Index start = 0;
  for (int b = 0; b < 3; ++b) {
    a.a.block(start, start, sizes[static_cast<std::size_t>(b)], sizes[static_cast<std::size_t>(b)]).setOnes();
    for (int t = 0; t < sizes[static_cast<std::size_t>(b)]; ++t) truth.push_back(b);
    start += sizes[static_cast<std::size_t>(b)];
  }
  for (std::uint64_t seed = 0; seed < 5; ++seed) CHECK(adjusted_rand_index(spectral_cluster(a, 3, seed), truth) == 1.0);
  const Labels one = spectral_cluster(a, 1, 0);
  CHECK(std::all_of(one.begin(), one.end(), [](int l) { return l == 0; }));
  CHECK_THROWS_AS((void)spectral_cluster(a, 15, 0), ArgumentError);

  CoAssociation flat;
  flat.a = Eigen::MatrixXd::Ones(6, 6);
  const Labels split = spectral_cluster(flat, 2, 0);
  CHECK(split.size() == 6);
  for (int l : split) CHECK((l == 0 || l == 1));
}

TEST_CASE("kmeans separates far clouds") {
  const Generated g = gen_blobs(3, 4, 30, 0.1, 20.0, 5);
  CHECK(adjusted_rand_index(kmeans(g.data, 3, 6), g.truth.labels) == 1.0);
}

TEST_CASE("run_ensemble: one run gives indicator entries, seeds differ per run") {
  const Generated g = gen_planes_line(30, 15, 0.01, 7);
  FamilyConfig cfg = affinity_config(4, 5, 8);
  const CoAssociation one = run_ensemble(g.data, cfg, 1);
  const Labels labels = run(g.data, cfg).state.labels;
  for (Index i = 0; i < one.a.rows(); ++i)
    for (Index j = 0; j < one.a.cols(); ++j)
      CHECK(one.a(i, j) == (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? 1.0 : 0.0));
  CHECK(run_seed(8, 3) == (8u ^ 3u));
  CHECK_THROWS_AS((void)run_ensemble(g.data, cfg, 0), ArgumentError);
}

TEST_CASE("co-association on planes and line: unit diagonal, symmetric, within beats across") {
  const Generated g = gen_planes_line(60, 30, 0.01, 9);
  const CoAssociation a = run_ensemble(g.data, affinity_config(4, 7, 10), 30);
  CHECK(a.a == a.a.transpose());
  CHECK(a.a.diagonal().isOnes(0.0));
  CHECK(a.a.minCoeff() >= 0.0);
  CHECK(a.a.maxCoeff() <= 1.0);
  double within = 0.0, across = 0.0;
  std::size_t nw = 0, na = 0;
  const auto& t = g.truth.labels;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (i == j) continue;
      if (t[i] == t[j]) {
        within += a.a(static_cast<Index>(i), static_cast<Index>(j));
        ++nw;
      } else {
        across += a.a(static_cast<Index>(i), static_cast<Index>(j));
        ++na;
      }
    }
  CHECK(within / static_cast<double>(nw) > across / static_cast<double>(na));
}

TEST_CASE("threads do not change the co-association") {
  const Generated g = gen_planes_line(30, 15, 0.01, 11);
  const FamilyConfig cfg = affinity_config(4, 7, 12);
  CHECK(run_ensemble(g.data, cfg, 6, 1).a == run_ensemble(g.data, cfg, 6, 3).a);
}

TEST_CASE("estimate_k rounds the mean final k") {
  const Generated g = gen_planes_line(40, 20, 0.01, 13);
  std::vector<std::size_t> finals;
  const std::size_t k = estimate_k(g.data, kest_config(4, 7, 14), 5, 1, &finals);
  REQUIRE(finals.size() == 5);
  const double mean = std::accumulate(finals.begin(), finals.end(), 0.0) / 5.0;
  CHECK(k == static_cast<std::size_t>(std::llround(mean)));
}

TEST_CASE("pipeline: single subspace gives one cluster, repeated calls agree") {
  DataMatrix line(3, 40);
  for (Index j = 0; j < 40; ++j) line.col(j) = (j - 19.5) * Eigen::Vector3d(1, 2, 2) / 3.0;
  const EnsembleResult one = ensemble_pipeline(line, kest_config(1, 1, 1), affinity_config(1, 1, 1), 5, 10);
  CHECK(one.k_hat == 1);
  for (int l : one.labels) CHECK(l == 0);

  const Generated g = gen_planes_line(40, 20, 0.01, 15);
  const EnsembleResult a = ensemble_pipeline(g.data, kest_config(4, 7, 16), affinity_config(4, 7, 16), 10, 20);
  const EnsembleResult b = ensemble_pipeline(g.data, kest_config(4, 7, 16), affinity_config(4, 7, 16), 10, 20);
  CHECK(a.labels == b.labels);
  CHECK(a.k_hat == b.k_hat);
}
