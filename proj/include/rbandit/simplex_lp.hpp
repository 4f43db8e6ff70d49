#pragma once

#include <span>
#include <vector>

#include "rbandit/dense.hpp"

namespace rbandit {

enum class LpSense { le, ge, eq };
enum class LpStatus { optimal, infeasible, unbounded };

/// minimize c.x  subject to  a x {<=,>=,==} b,  x >= 0
struct LpProblem {
  Mat a;
  std::vector<double> b;
  std::vector<double> c;
  std::vector<LpSense> sense;
};

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

/// Dense two-phase simplex with Bland's rule. On an optimal exit the result
/// carries a verified certificate: primal feasibility, dual feasibility and
/// a duality gap all within 1e-8 (scaled); a violation throws Error.
LpSolution solve_lp(const LpProblem& p);

}  // namespace rbandit
