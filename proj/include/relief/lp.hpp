#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace relief {

enum class LpStatus { Optimal, Infeasible, Unbounded };
enum class RowSense { Eq, Le, Ge };

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  double objective = 0.0;
  std::vector<double> x;      // per variable
  std::vector<double> duals;  // per row: d(objective)/d(rhs)
};

// A linear program in "variables then rows" build order. Rows may carry link
// coefficients: the effective right-hand side is rhs + sum_k coeff_k * v_k for
// link values v supplied at solve time, which is how the previous stage's
// state enters a stage problem. Row duals against those coefficients give the
// Benders cut slope with respect to v.
//
// Solved by a dense two-phase tableau simplex: Dantzig entering rule with a
// Bland fallback for anti-cycling, deterministic lowest-index tie-breaking,
// so identical inputs produce identical solutions.
class LinearProgram {
 public:
  int add_variable(double cost, double lower = 0.0) {
    cost_.push_back(cost);
    lower_.push_back(lower);
    return static_cast<int>(cost_.size()) - 1;
  }

  int add_row(RowSense sense, double rhs) {
    rows_.push_back({{}, {}, sense, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  void set_coeff(int row, int var, double a) {
    if (var < 0 || var >= n_vars()) throw std::out_of_range("lp: bad variable index");
    if (a != 0.0) rows_.at(row).terms.push_back({var, a});
  }

  // rhs of `row` gains coeff * link_values[k] at solve time.
  void set_link(int row, int k, double coeff) {
    if (k < 0) throw std::out_of_range("lp: bad link index");
    if (coeff != 0.0) rows_.at(row).links.push_back({k, coeff});
    n_links_ = std::max(n_links_, k + 1);
  }

  void set_objective_constant(double c) { obj_constant_ = c; }
  void add_objective_constant(double c) { obj_constant_ += c; }
  double objective_constant() const { return obj_constant_; }

  int n_vars() const { return static_cast<int>(cost_.size()); }
  int n_rows() const { return static_cast<int>(rows_.size()); }
  int n_links() const { return n_links_; }

  LpSolution solve(std::span<const double> link_values = {}) const;

  // d(objective)/d(link value k), from the solved duals.
  std::vector<double> cut_slope(const LpSolution& sol) const {
    std::vector<double> slope(n_links_, 0.0);
    for (int r = 0; r < n_rows(); ++r)
      for (const auto& [k, coeff] : rows_[r].links) slope[k] += sol.duals[r] * coeff;
    return slope;
  }

 private:
  struct Row {
    std::vector<std::pair<int, double>> terms;
    std::vector<std::pair<int, double>> links;
    RowSense sense = RowSense::Le;
    double rhs = 0.0;
  };

  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<Row> rows_;
  double obj_constant_ = 0.0;
  int n_links_ = 0;
};

inline LpSolution LinearProgram::solve(std::span<const double> link_values) const {
  if (static_cast<int>(link_values.size()) < n_links_)
    throw std::invalid_argument("lp: too few link values");
  const int nv = n_vars();
  const int m = n_rows();
  constexpr double kPivTol = 1e-9;

  // Max-equilibration: scale every row, then every column, to unit magnitude.
  // Master problems mix coefficients spanning many orders (cut slopes vs.
  // flow rows), and the raw tableau loses feasibility/optimality otherwise.
  std::vector<double> row_scale(m, 1.0), col_scale(nv, 1.0);
  for (int r = 0; r < m; ++r) {
    double mx = 0.0;
    for (const auto& [j, a] : rows_[r].terms) mx = std::max(mx, std::abs(a));
    if (mx > 0.0) row_scale[r] = 1.0 / mx;
  }
  {
    std::vector<double> col_max(nv, 0.0);
    for (int r = 0; r < m; ++r)
      for (const auto& [j, a] : rows_[r].terms)
        col_max[j] = std::max(col_max[j], std::abs(a) * row_scale[r]);
    for (int j = 0; j < nv; ++j)
      if (col_max[j] > 0.0) col_scale[j] = 1.0 / col_max[j];
  }

  // Effective rhs per row for shifted variables x' = x - lower, sign-flipped
  // where needed so every b is nonnegative.
  std::vector<double> b(m);
  std::vector<double> dual_sign(m, 1.0);
  std::vector<RowSense> sense(m);
  for (int r = 0; r < m; ++r) {
    double v = rows_[r].rhs;
    for (const auto& [k, coeff] : rows_[r].links) v += coeff * link_values[k];
    for (const auto& [j, a] : rows_[r].terms) v -= a * lower_[j];
    v *= row_scale[r];
    sense[r] = rows_[r].sense;
    if (v < 0.0) {
      v = -v;
      dual_sign[r] = -1.0;
      if (sense[r] == RowSense::Le) sense[r] = RowSense::Ge;
      else if (sense[r] == RowSense::Ge) sense[r] = RowSense::Le;
    }
    b[r] = v;
  }

  // Column layout: structural | one slack/surplus per inequality | one
  // artificial per Ge/Eq row. Artificials never re-enter in phase 2; the one
  // attached to row r (or the slack for Le rows) exposes that row's dual.
  std::vector<int> slack_col(m, -1), art_col(m, -1);
  int ncols = nv;
  for (int r = 0; r < m; ++r)
    if (sense[r] != RowSense::Eq) slack_col[r] = ncols++;
  const int first_art = ncols;
  for (int r = 0; r < m; ++r)
    if (sense[r] != RowSense::Le) art_col[r] = ncols++;

  const int width = ncols + 1;  // last column holds b
  std::vector<double> tab(static_cast<std::size_t>(m) * width, 0.0);
  auto at = [&](int r, int c) -> double& { return tab[static_cast<std::size_t>(r) * width + c]; };
  std::vector<int> basis(m, -1);
  for (int r = 0; r < m; ++r) {
    const double s = dual_sign[r] * row_scale[r];
    for (const auto& [j, a] : rows_[r].terms) at(r, j) += s * a * col_scale[j];
    if (slack_col[r] >= 0) at(r, slack_col[r]) = sense[r] == RowSense::Le ? 1.0 : -1.0;
    if (art_col[r] >= 0) at(r, art_col[r]) = 1.0;
    at(r, ncols) = b[r];
    basis[r] = art_col[r] >= 0 ? art_col[r] : slack_col[r];
  }

  // Reduced-cost rows for both phases, updated together through phase 1.
  std::vector<double> r1(width, 0.0), r2(width, 0.0);
  for (int r = 0; r < m; ++r)
    if (art_col[r] >= 0)
      for (int c = 0; c <= ncols; ++c) r1[c] -= at(r, c);
  for (int r = 0; r < m; ++r)
    if (art_col[r] >= 0) r1[art_col[r]] = 0.0;
  for (int j = 0; j < nv; ++j) r2[j] = cost_[j] * col_scale[j];

  auto pivot = [&](int pr, int pc) {
    const double piv = at(pr, pc);
    for (int c = 0; c <= ncols; ++c) at(pr, c) /= piv;
    at(pr, pc) = 1.0;
    for (int r = 0; r < m; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= ncols; ++c) at(r, c) -= f * at(pr, c);
      at(r, pc) = 0.0;
    }
    for (auto* obj : {&r1, &r2}) {
      const double f = (*obj)[pc];
      if (f == 0.0) continue;
      for (int c = 0; c <= ncols; ++c) (*obj)[c] -= f * at(pr, c);
      (*obj)[pc] = 0.0;
    }
    basis[pr] = pc;
  };

  // Leaving row: minimum ratio, ties by lowest basis index (Bland's rule).
  // The pivot cutoff is relative to the column's magnitude: accepting a pivot
  // orders of magnitude below its column blows the tableau up numerically.
  auto leaving = [&](int pc) {
    double col_max = 0.0;
    for (int r = 0; r < m; ++r) col_max = std::max(col_max, std::abs(at(r, pc)));
    const double cutoff = std::max(kPivTol, 1e-7 * col_max);
    int best = -1;
    double best_ratio = 0.0;
    for (int r = 0; r < m; ++r) {
      const double a = at(r, pc);
      if (a <= cutoff) continue;
      const double ratio = at(r, ncols) / a;
      if (best < 0 || ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && basis[r] < basis[best])) {
        best = r;
        best_ratio = ratio;
      }
    }
    return best;
  };

  auto run_phase = [&](std::vector<double>& obj, bool allow_art) -> bool {
    const long bland_after = 2000L + 20L * (m + ncols);
    for (long it = 0;; ++it) {
      const bool bland = it > bland_after;
      int pc = -1;
      double best = -kPivTol;
      const int limit = allow_art ? ncols : first_art;
      for (int c = 0; c < limit; ++c) {
        if (obj[c] < best) {
          pc = c;
          best = obj[c];
          if (bland) break;
        }
      }
      if (pc < 0) return true;  // optimal for this phase
      const int pr = leaving(pc);
      if (pr < 0) return false;  // unbounded direction
      pivot(pr, pc);
    }
  };

  LpSolution sol;
  // Phase 1: drive artificials to zero.
  double bmax = 1.0;
  for (int r = 0; r < m; ++r) bmax = std::max(bmax, b[r]);
  if (first_art < ncols) {
    run_phase(r1, true);  // always bounded below by 0
    if (-r1[ncols] > 1e-7 * bmax) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Pivot residual zero-level artificials out where a structural pivot
    // exists; a fully zero row is redundant and may keep its artificial.
    for (int r = 0; r < m; ++r) {
      if (basis[r] < first_art) continue;
      for (int c = 0; c < first_art; ++c)
        if (std::abs(at(r, c)) > 1e-7) {
          pivot(r, c);
          break;
        }
    }
  }

  if (!run_phase(r2, false)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  sol.status = LpStatus::Optimal;
  sol.x.assign(nv, 0.0);
  for (int r = 0; r < m; ++r)
    if (basis[r] < nv) sol.x[basis[r]] = at(r, ncols);
  for (int j = 0; j < nv; ++j) sol.x[j] = sol.x[j] * col_scale[j] + lower_[j];
  sol.objective = obj_constant_;
  for (int j = 0; j < nv; ++j) sol.objective += cost_[j] * sol.x[j];
  sol.duals.assign(m, 0.0);
  for (int r = 0; r < m; ++r) {
    const int c = art_col[r] >= 0 ? art_col[r] : slack_col[r];
    sol.duals[r] = dual_sign[r] * row_scale[r] * -r2[c];
  }
  return sol;
}

}  // namespace relief
