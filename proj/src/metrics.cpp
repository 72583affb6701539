#include "gfam/metrics.hpp"

#include <algorithm>
#include <limits>
#include <map>

#include "gfam/error.hpp"

namespace gfam {

namespace {

struct Table {
  std::vector<std::vector<double>> count;
  std::size_t rows = 0, cols = 0;
};

Table contingency(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw ArgumentError("label vectors differ in length");
  std::map<int, std::size_t> ia, ib;
  for (int l : a) ia.emplace(l, ia.size());
  for (int l : b) ib.emplace(l, ib.size());
  Table t;
  t.rows = ia.size();
  t.cols = ib.size();
  t.count.assign(t.rows, std::vector<double>(t.cols, 0.0));
  for (std::size_t p = 0; p < a.size(); ++p) t.count[ia[a[p]]][ib[b[p]]] += 1.0;
  return t;
}

double choose2(double x) { return x * (x - 1.0) / 2.0; }

// Minimum-cost assignment on a square matrix (rows matched to distinct columns).
double hungarian_min(const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  double total = 0.0;
  for (std::size_t j = 1; j <= n; ++j)
    if (p[j]) total += cost[p[j] - 1][j - 1];
  return total;
}

}  // namespace

double adjusted_rand_index(const Labels& a, const Labels& b) {
  const Table t = contingency(a, b);
  const double n = static_cast<double>(a.size());
  double sum_cells = 0.0;
  std::vector<double> row(t.rows, 0.0), col(t.cols, 0.0);
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) {
      sum_cells += choose2(t.count[i][j]);
      row[i] += t.count[i][j];
      col[j] += t.count[i][j];
    }
  double sum_rows = 0.0, sum_cols = 0.0;
  for (double r : row) sum_rows += choose2(r);
  for (double c : col) sum_cols += choose2(c);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions trivial
  return (sum_cells - expected) / (max_index - expected);
}

double clustering_error(const Labels& predicted, const Labels& truth) {
  const Table t = contingency(predicted, truth);
  const std::size_t n = std::max(t.rows, t.cols);
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < t.rows; ++i)
    for (std::size_t j = 0; j < t.cols; ++j) cost[i][j] = -t.count[i][j];
  const double matched = -hungarian_min(cost);
  return 1.0 - matched / static_cast<double>(predicted.size());
}

}  // namespace gfam
