#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "prl/error.hpp"

namespace prl {

// Dense row-major matrix of pair weights.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  WeightMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    for (const auto& r : rows) {
      if (r.size() != cols_) throw ValidationError("WeightMatrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A one-to-one (partial) assignment. row_to_col[r] is -1 for unassigned rows.
// The duals are the solver's potentials in original row/column coordinates
// and only serve as warm-start input.
struct Assignment {
  std::vector<int> row_to_col;
  double objective = 0.0;
  std::vector<double> row_duals;
  std::vector<double> col_duals;

  std::size_t size() const {
    return static_cast<std::size_t>(std::count_if(row_to_col.begin(), row_to_col.end(), [](int c) { return c >= 0; }));
  }
  std::vector<std::pair<int, int>> links() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t r = 0; r < row_to_col.size(); ++r)
      if (row_to_col[r] >= 0) out.emplace_back(static_cast<int>(r), row_to_col[r]);
    return out;
  }
};

// Previous solution used to seed a new solve: its tight links become the
// initial matching and its duals the initial column prices.
struct LsapHint {
  std::vector<int> row_to_col;
  std::vector<double> row_duals;
  std::vector<double> col_duals;

  bool empty() const { return row_to_col.empty(); }
  bool compatible(std::size_t rows, std::size_t cols) const {
    return row_to_col.size() == rows && row_duals.size() == rows && col_duals.size() == cols;
  }
};

inline LsapHint warm_start_hint(const Assignment& previous) {
  return {previous.row_to_col, previous.row_duals, previous.col_duals};
}

struct LsapStats {
  int augmentations = 0;
  int seeded_rows = 0;
  bool warm_started = false;
};

namespace detail {

// Minimum-cost perfect assignment on an n x n cost matrix by successive
// shortest augmenting paths with row/column potentials. `v` holds initial
// column potentials, `row_to_col` optional seed links (-1 = none); seeds that
// are not tight under the seeded duals are dropped. Ties resolve to the lowest
// column index.
class SquareAssignment {
 public:
  SquareAssignment(std::span<const double> cost, int n) : cost_(cost), n_(n) {}

  void solve(std::vector<double>& u, std::vector<double>& v, std::vector<int>& row_to_col, LsapStats& stats) {
    const int n = n_;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> U(n + 1, 0.0), V(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    if (static_cast<int>(v.size()) == n)
      for (int j = 0; j < n; ++j) V[j + 1] = v[j];

    std::vector<char> seeded(n, 0);
    for (int i = 0; i < n; ++i) {
      double best = inf;
      for (int j = 0; j < n; ++j) best = std::min(best, c(i, j) - V[j + 1]);
      U[i + 1] = best;
      const int j = i < static_cast<int>(row_to_col.size()) ? row_to_col[i] : -1;
      if (j >= 0 && j < n && p[j + 1] == 0 && c(i, j) - V[j + 1] == best) {
        p[j + 1] = i + 1;
        seeded[i] = 1;
        ++stats.seeded_rows;
      }
    }

    std::vector<double> minv(n + 1);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
      if (seeded[i - 1]) continue;
      p[0] = i;
      int j0 = 0;
      std::fill(minv.begin(), minv.end(), inf);
      std::fill(used.begin(), used.end(), 0);
      do {
        used[j0] = 1;
        const int i0 = p[j0];
        double delta = inf;
        int j1 = 0;
        for (int j = 1; j <= n; ++j) {
          if (used[j]) continue;
          const double cur = c(i0 - 1, j - 1) - U[i0] - V[j];
          if (cur < minv[j]) {
            minv[j] = cur;
            way[j] = j0;
          }
          if (minv[j] < delta) {
            delta = minv[j];
            j1 = j;
          }
        }
        for (int j = 0; j <= n; ++j) {
          if (used[j]) {
            U[p[j]] += delta;
            V[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const int j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
      ++stats.augmentations;
    }

    row_to_col.assign(n, -1);
    for (int j = 1; j <= n; ++j)
      if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    u.assign(U.begin() + 1, U.end());
    v.assign(V.begin() + 1, V.end());
  }

 private:
  double c(int i, int j) const { return cost_[static_cast<std::size_t>(i) * n_ + j]; }

  std::span<const double> cost_;
  int n_;
};

}  // namespace detail

// Maximum-weight assignment covering every row or every column, whichever
// side is smaller. Rectangular inputs are transposed so rows <= columns and
// padded with zero-cost dummy rows to a square minimization problem.
inline Assignment solve_lsap(const WeightMatrix& w, const LsapHint& hint = {}, LsapStats* stats = nullptr) {
  LsapStats local;
  LsapStats& st = stats ? *stats : local;
  st = {};
  Assignment result;
  result.row_to_col.assign(w.rows(), -1);
  result.row_duals.assign(w.rows(), 0.0);
  result.col_duals.assign(w.cols(), 0.0);
  if (w.empty()) return result;

  const bool transposed = w.rows() > w.cols();
  const std::size_t real_rows = transposed ? w.cols() : w.rows();
  const std::size_t n = transposed ? w.rows() : w.cols();
  auto weight = [&](std::size_t i, std::size_t j) { return transposed ? w(j, i) : w(i, j); };

  std::vector<double> cost(n * n, 0.0);
  for (std::size_t i = 0; i < real_rows; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = -weight(i, j);

  std::vector<double> u, v;
  std::vector<int> seeds(n, -1);
  if (!hint.empty() && hint.compatible(w.rows(), w.cols())) {
    st.warm_started = true;
    v = transposed ? hint.row_duals : hint.col_duals;
    for (std::size_t r = 0; r < w.rows(); ++r) {
      const int c = hint.row_to_col[r];
      if (c < 0 || static_cast<std::size_t>(c) >= w.cols()) continue;
      if (transposed)
        seeds[static_cast<std::size_t>(c)] = static_cast<int>(r);
      else
        seeds[r] = c;
    }
  }

  detail::SquareAssignment(cost, static_cast<int>(n)).solve(u, v, seeds, st);

  for (std::size_t i = 0; i < real_rows; ++i) {
    const int j = seeds[i];
    if (transposed)
      result.row_to_col[static_cast<std::size_t>(j)] = static_cast<int>(i);
    else
      result.row_to_col[i] = j;
  }
  if (transposed) {
    result.row_duals = v;
    result.col_duals.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(real_rows));
  } else {
    result.row_duals.assign(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(real_rows));
    result.col_duals = v;
  }
  for (std::size_t r = 0; r < w.rows(); ++r)
    if (result.row_to_col[r] >= 0) result.objective += w(r, static_cast<std::size_t>(result.row_to_col[r]));
  return result;
}

// Maximizes sum C_ab (w_ab - theta) over partial one-to-one matchings:
// soft-threshold the weights to max(w - theta, 0), solve the LSAP on the rows
// and columns that have any positive entry, and drop links whose thresholded
// weight is zero. The objective is reported on the (w - theta) scale.
inline Assignment solve_thresholded(const WeightMatrix& w, double theta, const LsapHint& hint = {},
                                   LsapStats* stats = nullptr) {
  if (stats) *stats = {};
  Assignment result;
  result.row_to_col.assign(w.rows(), -1);
  const bool use_hint = !hint.empty() && hint.compatible(w.rows(), w.cols());
  result.row_duals = use_hint ? hint.row_duals : std::vector<double>(w.rows(), 0.0);
  result.col_duals = use_hint ? hint.col_duals : std::vector<double>(w.cols(), 0.0);

  std::vector<int> keep_row, keep_col;
  std::vector<int> col_pos(w.cols(), -1);
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c)
      if (w(r, c) - theta > 0.0) {
        keep_row.push_back(static_cast<int>(r));
        break;
      }
  for (std::size_t c = 0; c < w.cols(); ++c)
    for (std::size_t r = 0; r < w.rows(); ++r)
      if (w(r, c) - theta > 0.0) {
        col_pos[c] = static_cast<int>(keep_col.size());
        keep_col.push_back(static_cast<int>(c));
        break;
      }
  if (keep_row.empty()) return result;

  WeightMatrix sub(keep_row.size(), keep_col.size());
  for (std::size_t i = 0; i < keep_row.size(); ++i)
    for (std::size_t j = 0; j < keep_col.size(); ++j)
      sub(i, j) = std::max(w(static_cast<std::size_t>(keep_row[i]), static_cast<std::size_t>(keep_col[j])) - theta, 0.0);

  LsapHint sub_hint;
  if (use_hint) {
    for (int r : keep_row) {
      const int c = hint.row_to_col[static_cast<std::size_t>(r)];
      sub_hint.row_to_col.push_back(c >= 0 ? col_pos[static_cast<std::size_t>(c)] : -1);
      sub_hint.row_duals.push_back(hint.row_duals[static_cast<std::size_t>(r)]);
    }
    for (int c : keep_col) sub_hint.col_duals.push_back(hint.col_duals[static_cast<std::size_t>(c)]);
  }

  Assignment sub_result = solve_lsap(sub, sub_hint, stats);
  for (std::size_t i = 0; i < keep_row.size(); ++i) {
    const auto r = static_cast<std::size_t>(keep_row[i]);
    result.row_duals[r] = sub_result.row_duals[i];
    const int j = sub_result.row_to_col[i];
    if (j < 0 || sub(i, static_cast<std::size_t>(j)) <= 0.0) continue;
    const int c = keep_col[static_cast<std::size_t>(j)];
    result.row_to_col[r] = c;
    result.objective += w(r, static_cast<std::size_t>(c)) - theta;
  }
  for (std::size_t j = 0; j < keep_col.size(); ++j)
    result.col_duals[static_cast<std::size_t>(keep_col[j])] = sub_result.col_duals[j];
  return result;
}

}  // namespace prl
