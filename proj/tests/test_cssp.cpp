#include "doctest.h"

#include <cmath>
#include <set>

#include "gfam/cssp.hpp"
#include "gfam/datagen.hpp"
#include "gfam/error.hpp"
#include "helpers.hpp"

using namespace gfam;
using testing::randn;

namespace {

const CsspMethod kMethods[] = {CsspMethod::deim, CsspMethod::cpqr, CsspMethod::lupp};

// Σ_{j>r} σ_j² / Σ σ_j² from a full eigensolve of AᵀA.
double svd_optimum(const DataMatrix& a, Index r) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a.transpose() * a);
  const Eigen::VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0);
  return ev.tail(ev.size() - r).sum() / ev.sum();
}

DataMatrix decaying(Index m, Index n, std::uint64_t seed) {
  const Eigen::MatrixXd u = testing::orthonormal(m, n, seed);
  const Eigen::MatrixXd v = testing::orthonormal(n, n, seed + 1);
  Eigen::VectorXd s(n);
  for (Index j = 0; j < n; ++j) s(j) = std::pow(0.9, static_cast<double>(j));
  return u * s.asDiagonal() * v.transpose();
}

}  // namespace

TEST_CASE("diagonal example selects the two largest columns") {
  const DataMatrix a = Eigen::Vector4d(4, 3, 2, 1).asDiagonal();
  for (CsspMethod m : kMethods) {
    const SelectionResult s = select_columns(a, 2, m);
    CHECK(std::set<Index>(s.col_indices.begin(), s.col_indices.end()) == std::set<Index>{0, 1});
    CHECK(s.relative_error == doctest::Approx(5.0 / 30.0).epsilon(1e-12));
  }
}

TEST_CASE("exact rank gives zero error and verbatim columns") {
  const DataMatrix a = randn(60, 8, 1) * randn(8, 40, 2);
  for (CsspMethod m : kMethods) {
    const SelectionResult s = select_columns(a, 8, m);
    CHECK(s.relative_error <= 1e-10);
    const Eigen::MatrixXd c = gather_columns(a, s.col_indices);
    for (std::size_t t = 0; t < s.col_indices.size(); ++t)
      CHECK(c.col(static_cast<Index>(t)) == a.col(s.col_indices[t]));
  }
}

TEST_CASE("decaying spectrum: every method within 3x of the SVD optimum") {
  const DataMatrix a = decaying(200, 100, 3);
  for (Index r : {5, 10, 20}) {
    const double best = svd_optimum(a, r);
    for (CsspMethod m : kMethods) {
      const SelectionResult s = select_columns(a, r, m);
      CHECK(s.relative_error >= best * (1 - 1e-9));
      CHECK(s.relative_error <= 3.0 * best);
    }
  }
}

TEST_CASE("argument checks") {
  const DataMatrix a = randn(5, 4, 4);
  CHECK_THROWS_AS((void)select_columns(a, 0, CsspMethod::cpqr), ArgumentError);
  CHECK_THROWS_AS((void)select_columns(a, 5, CsspMethod::cpqr), ArgumentError);
  CHECK_THROWS_AS((void)parse_method("svd"), ArgumentError);
  CHECK(parse_method("lupp") == CsspMethod::lupp);
}

TEST_CASE("deim on a permuted identity recovers the permutation") {
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(5, 3);
  basis(3, 0) = 1;
  basis(0, 1) = 1;
  basis(4, 2) = 1;
  CHECK(deim_indices(basis) == std::vector<Index>{3, 0, 4});
}

TEST_CASE("partitioned selection with one cluster equals plain selection") {
  const DataMatrix a = decaying(80, 60, 5);
  for (CsspMethod m : kMethods) {
    const SelectionResult p = partitioned_select(a, 12, 1, m, PairingVariant::cvod_based, 6);
    CHECK(p.col_indices == select_columns(a, 12, m).col_indices);
  }
}

TEST_CASE("two orthogonal rank-2 blocks are recovered exactly") {
  const Eigen::MatrixXd q = testing::orthonormal(30, 4, 7);
  DataMatrix a(30, 40);
  a.leftCols(20) = q.leftCols(2) * randn(2, 20, 8);
  a.rightCols(20) = q.rightCols(2) * randn(2, 20, 9);
  for (CsspMethod m : kMethods) {
    const SelectionResult s = partitioned_select(a, 4, 2, m, PairingVariant::cvod_based, 10);
    CHECK(s.relative_error <= 1e-10);
    REQUIRE(s.col_indices.size() == 4);
    int left = 0;
    for (Index c : s.col_indices) left += c < 20 ? 1 : 0;
    CHECK(left == 2);
    REQUIRE(s.g_star.has_value());
    CHECK(*s.g_star <= 1e-12 * a.squaredNorm());
    const auto mon = theorem1_monitor({s});
    CHECK(mon[0].residual_norm <= 1e-9 * a.norm());
  }
}

TEST_CASE("partitioned selection: r distinct columns, error in [0, 1]") {
  const Generated g = gen_clustered_lowrank(50, 4, 25, 5, 1e-3, 11);
  for (CsspMethod m : kMethods)
    for (PairingVariant v : {PairingVariant::cvod_based, PairingVariant::vqpca_based}) {
      const SelectionResult s = partitioned_select(g.data, 16, 4, m, v, 12);
      CHECK(s.col_indices.size() == 16);
      CHECK(std::set<Index>(s.col_indices.begin(), s.col_indices.end()).size() == 16);
      CHECK(s.relative_error >= 0.0);
      CHECK(s.relative_error <= 1.0);
    }
}

TEST_CASE("cur: exact skeleton, identity case, pseudo beats skeleton") {
  const DataMatrix r2 = randn(12, 2, 13) * randn(2, 9, 14);
  for (CurMode mode : {CurMode::pseudo, CurMode::skeleton})
    CHECK(build_cur(r2, {0, 1}, {0, 1}, mode).relative_error <= 1e-9);

  const DataMatrix a = randn(10, 7, 15);
  CHECK(build_cur(a, {0, 1, 2, 3, 4, 5, 6}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, CurMode::pseudo).relative_error <= 1e-12);

  DataMatrix noisy = randn(100, 10, 16) * randn(10, 80, 17) + 1e-8 * randn(100, 80, 18);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SelectionResult cols = partitioned_select(noisy, 10, 3, CsspMethod::cpqr, PairingVariant::cvod_based, seed);
    const SelectionResult rows = select_columns(noisy.transpose(), 10, CsspMethod::cpqr);
    const double p = build_cur(noisy, cols.col_indices, rows.col_indices, CurMode::pseudo).relative_error;
    const double s = build_cur(noisy, cols.col_indices, rows.col_indices, CurMode::skeleton).relative_error;
    CHECK(p <= s + 1e-6);
  }
  CHECK_THROWS_AS((void)build_cur(a, {}, {0}, CurMode::pseudo), ArgumentError);
  CHECK_THROWS_AS((void)build_cur(a, {7}, {0}, CurMode::pseudo), ArgumentError);
}

TEST_CASE("monitor rows are finite and formatted") {
  const LowRank lr = gen_lowrank_noise(60, 50, 10, 1e-3, Decay::geometric, 19);
  std::vector<SelectionResult> sweep;
  for (Index r : {4, 8, 12}) sweep.push_back(partitioned_select(lr.data, r, 3, CsspMethod::deim, PairingVariant::cvod_based, 20));
  const auto rows = theorem1_monitor(sweep);
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    CHECK(std::isfinite(row.ratio));
    CHECK(row.squared_ratio == doctest::Approx(row.residual_norm * row.ratio));
  }
  const std::string csv = monitor_csv(rows);
  CHECK(csv.rfind("r,residual_norm,g_star,ratio,squared_ratio\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  SelectionResult zero;
  zero.residual_norm = 0.0;
  zero.g_star = 0.0;
  CHECK(theorem1_monitor({zero})[0].ratio == 0.0);
}
