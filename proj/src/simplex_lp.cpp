#include "rbandit/simplex_lp.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "rbandit/errors.hpp"

namespace rbandit {

namespace {

constexpr double kCostTol = 1e-9;
constexpr double kRatioTol = 1e-9;
constexpr long kMaxPivots = 200000;

struct Tableau {
  Mat t;                     // m x (ncols + 1), last column is the rhs
  std::vector<int> basis;    // basic column per row
  std::size_t ncols = 0;

  double& rhs(std::size_t i) { return t(i, ncols); }
  double rhs(std::size_t i) const { return t(i, ncols); }

  void pivot(std::size_t row, std::size_t col) {
    const double p = t(row, col);
    for (std::size_t j = 0; j <= ncols; ++j) t(row, j) /= p;
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) t(i, j) -= f * t(row, j);
    }
    basis[row] = static_cast<int>(col);
  }
};

// Reduced costs for the given objective under the current basis.
std::vector<double> reduced_costs(const Tableau& tab, std::span<const double> cost) {
  std::vector<double> d(cost.begin(), cost.end());
  for (std::size_t i = 0; i < tab.t.rows(); ++i) {
    const double cb = cost[static_cast<std::size_t>(tab.basis[i])];
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j < tab.ncols; ++j) d[j] -= cb * tab.t(i, j);
  }
  return d;
}

// Bland's rule iteration until no entering column remains.
// Returns false when an unbounded ray is detected.
bool run_simplex(Tableau& tab, std::span<const double> cost,
                 const std::vector<bool>& banned) {
  long pivots = 0;
  while (true) {
    if (++pivots > kMaxPivots) throw Error("simplex iteration limit exceeded");
    std::vector<double> d = reduced_costs(tab, cost);
    std::size_t enter = tab.ncols;
    for (std::size_t j = 0; j < tab.ncols; ++j) {
      if (banned[j]) continue;
      if (d[j] < -kCostTol) {
        enter = j;
        break;  // Bland: smallest eligible index
      }
    }
    if (enter == tab.ncols) return true;
    std::size_t leave = tab.t.rows();
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tab.t.rows(); ++i) {
      if (tab.t(i, enter) <= kRatioTol) continue;
      const double ratio = tab.rhs(i) / tab.t(i, enter);
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 &&
           (leave == tab.t.rows() || tab.basis[i] < tab.basis[leave]))) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave == tab.t.rows()) return false;  // unbounded
    tab.pivot(leave, enter);
  }
}

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const std::size_t m = p.a.rows();
  const std::size_t n = p.a.cols();
  assert(p.b.size() == m && p.c.size() == n && p.sense.size() == m);

  // Normalize rows to b >= 0.
  Mat a = p.a;
  std::vector<double> b = p.b;
  std::vector<LpSense> sense = p.sense;
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0) {
      b[i] = -b[i];
      for (std::size_t j = 0; j < n; ++j) a(i, j) = -a(i, j);
      if (sense[i] == LpSense::le) sense[i] = LpSense::ge;
      else if (sense[i] == LpSense::ge) sense[i] = LpSense::le;
    }
  }

  // Standard form: structural | slack/surplus | artificial.
  std::size_t n_slack = 0, n_art = 0;
  for (const LpSense s : sense) {
    if (s != LpSense::eq) ++n_slack;
    if (s != LpSense::le) ++n_art;
  }
  const std::size_t ncols = n + n_slack + n_art;

  Tableau tab;
  tab.ncols = ncols;
  tab.t = Mat(m, ncols + 1);
  tab.basis.assign(m, -1);
  std::vector<bool> artificial(ncols, false);

  std::size_t slack_at = n, art_at = n + n_slack;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.t(i, j) = a(i, j);
    tab.rhs(i) = b[i];
    switch (sense[i]) {
      case LpSense::le:
        tab.t(i, slack_at) = 1.0;
        tab.basis[i] = static_cast<int>(slack_at++);
        break;
      case LpSense::ge:
        tab.t(i, slack_at++) = -1.0;
        [[fallthrough]];
      case LpSense::eq:
        tab.t(i, art_at) = 1.0;
        artificial[art_at] = true;
        tab.basis[i] = static_cast<int>(art_at++);
        break;
    }
  }

  LpSolution sol;

  // Phase 1: drive the artificial variables to zero.
  if (n_art > 0) {
    std::vector<double> phase1_cost(ncols, 0.0);
    for (std::size_t j = 0; j < ncols; ++j)
      if (artificial[j]) phase1_cost[j] = 1.0;
    std::vector<bool> none(ncols, false);
    if (!run_simplex(tab, phase1_cost, none))
      throw Error("phase-1 simplex reported an unbounded ray");
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (artificial[static_cast<std::size_t>(tab.basis[i])]) infeas += tab.rhs(i);
    if (infeas > 1e-9) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Pivot residual artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (!artificial[static_cast<std::size_t>(tab.basis[i])]) continue;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (artificial[j]) continue;
        if (std::abs(tab.t(i, j)) > kRatioTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  // Phase 2 on the real objective; artificial columns may not re-enter.
  std::vector<double> cost(ncols, 0.0);
  for (std::size_t j = 0; j < n; ++j) cost[j] = p.c[j];
  if (!run_simplex(tab, cost, artificial)) {
    sol.status = LpStatus::unbounded;
    return sol;
  }

  sol.status = LpStatus::optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = static_cast<std::size_t>(tab.basis[i]);
    if (j < n) sol.x[j] = tab.rhs(i);
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += p.c[j] * sol.x[j];

  // Optimality certificate. The dual comes from solving B^T y = c_B against
  // the pristine standardized columns; dual feasibility plus a tight gap is
  // the actual proof of optimality, independent of the pivot path.
  {
    Mat a_std(m, ncols);
    std::size_t s_at = n, r_at = n + n_slack;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) a_std(i, j) = a(i, j);
      switch (sense[i]) {
        case LpSense::le: a_std(i, s_at++) = 1.0; break;
        case LpSense::ge: a_std(i, s_at++) = -1.0; a_std(i, r_at++) = 1.0; break;
        case LpSense::eq: a_std(i, r_at++) = 1.0; break;
      }
    }
    Mat bt(m, m);
    std::vector<double> cb(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = static_cast<std::size_t>(tab.basis[i]);
      cb[i] = cost[j];
      for (std::size_t r = 0; r < m; ++r) bt(i, r) = a_std(r, j);
    }
    std::vector<double> y(m, 0.0);
    if (!solve_square(bt, cb, y, 1e-12))
      throw Error("simplex: singular final basis");
    double scale = 1.0;
    for (std::size_t j = 0; j < n; ++j) scale = std::max(scale, std::abs(p.c[j]));
    for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, std::abs(b[i]));
    for (std::size_t j = 0; j < ncols; ++j) {
      if (artificial[j]) continue;
      double red = cost[j];
      for (std::size_t i = 0; i < m; ++i) red -= y[i] * a_std(i, j);
      if (red < -1e-8 * scale) throw Error("simplex: dual infeasible at exit");
    }
    double yb = 0.0;
    for (std::size_t i = 0; i < m; ++i) yb += y[i] * b[i];
    if (std::abs(yb - sol.objective) > 1e-8 * (1.0 + std::abs(sol.objective)))
      throw Error("simplex: duality gap above tolerance");
  }

  return sol;
}

}  // namespace rbandit
