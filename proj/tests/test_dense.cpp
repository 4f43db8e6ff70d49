#include <doctest.h>

#include <cmath>

#include "rbandit/dense.hpp"
#include "rbandit/rng.hpp"
#include "rbandit/simplex_lp.hpp"

using namespace rbandit;

TEST_CASE("solve_square handles a hand-checked 2x2 system") {
  Mat a(2, 2, {2, 3, 4, 5});
  std::vector<double> x(2, 0.0);
  REQUIRE(solve_square(a, {1, 1}, x));
  CHECK(x[0] == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("solve_square rejects singular systems at the pivot tolerance") {
  Mat a(2, 2, {1, 2, 2, 4});
  std::vector<double> x(2, 0.0);
  CHECK_FALSE(solve_square(a, {1, 1}, x));
}

TEST_CASE("determinant tracks row swaps and singularity") {
  CHECK(determinant(Mat(2, 2, {2, 3, 4, 5})) == doctest::Approx(-2.0));
  CHECK(determinant(Mat(2, 2, {0, 1, 1, 0})) == doctest::Approx(-1.0));
  CHECK(determinant(Mat(2, 2, {1, 2, 2, 4})) == 0.0);
  CHECK(determinant(Mat(3, 3, {2, 0, 0, 0, 3, 0, 0, 0, 4})) == doctest::Approx(24.0));
}

TEST_CASE("rank of tall matrices") {
  CHECK(rank(Mat(3, 2, {2, 3, 4, 5, 2, 1})) == 2);
  CHECK(rank(Mat(3, 2, {1, 2, 2, 4, 3, 6})) == 1);
  CHECK(rank(Mat(2, 1, {3, 1})) == 1);
}

TEST_CASE("first_independent_rows picks the lexicographically first subset") {
  // Row 1 duplicates row 0, so the subset must skip it.
  Mat a(4, 2, {1, 1, 2, 2, 1, 1, 0, 1});
  const auto rows = first_independent_rows(a);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == 0);
  CHECK(rows[1] == 3);
  CHECK(first_independent_rows(Mat(2, 2, {1, 0, 2, 0})).empty());
}

TEST_CASE("positive semidefinite check") {
  CHECK(is_positive_semidefinite(Mat(2, 2, {2, 1, 1, 2})));
  CHECK(is_positive_semidefinite(Mat(2, 2, {1, 1, 1, 1})));  // rank-1 PSD
  CHECK_FALSE(is_positive_semidefinite(Mat(2, 2, {1, 2, 2, 1})));
  CHECK_FALSE(is_positive_semidefinite(Mat(2, 2, {-1, 0, 0, 1})));
}

TEST_CASE("simplex solves a small bounded LP with equality rows") {
  // min -x - y  s.t.  x + y <= 4, x <= 3, y <= 3
  LpProblem lp;
  lp.a = Mat(3, 2, {1, 1, 1, 0, 0, 1});
  lp.b = {4, 3, 3};
  lp.c = {-1, -1};
  lp.sense = {LpSense::le, LpSense::le, LpSense::le};
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("simplex detects infeasible and unbounded problems") {
  {
    // x >= 2 and x <= 1
    LpProblem lp;
    lp.a = Mat(2, 1, {1, 1});
    lp.b = {2, 1};
    lp.c = {0};
    lp.sense = {LpSense::ge, LpSense::le};
    CHECK(solve_lp(lp).status == LpStatus::infeasible);
  }
  {
    // min -x s.t. x >= 1
    LpProblem lp;
    lp.a = Mat(1, 1, {1});
    lp.b = {1};
    lp.c = {-1};
    lp.sense = {LpSense::ge};
    CHECK(solve_lp(lp).status == LpStatus::unbounded);
  }
}

TEST_CASE("simplex optimum matches a brute-force vertex scan on random LPs") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    // min c.x over x >= 0, a x <= b with b > 0 (origin feasible, bounded box).
    const std::size_t n = 2;
    LpProblem lp;
    lp.a = Mat(4, n);
    lp.b.assign(4, 0.0);
    lp.c.assign(n, 0.0);
    lp.sense.assign(4, LpSense::le);
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < n; ++j) lp.a(i, j) = rng.next_unit() * 2.0 - 0.5;
    lp.a(2, 0) = 1.0;  // x <= 3
    lp.a(3, 1) = 1.0;  // y <= 3
    lp.b = {1.0 + rng.next_unit(), 1.0 + rng.next_unit(), 3.0, 3.0};
    lp.c = {rng.next_unit() * 2.0 - 1.0, rng.next_unit() * 2.0 - 1.0};
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::optimal);

    // Vertex scan: all pairs of tight constraints (including axes).
    double best = 0.0;  // origin
    Mat rows(6, 2);
    std::vector<double> rhs(6, 0.0);
    for (std::size_t i = 0; i < 4; ++i) {
      rows(i, 0) = lp.a(i, 0);
      rows(i, 1) = lp.a(i, 1);
      rhs[i] = lp.b[i];
    }
    rows(4, 0) = 1.0;
    rows(5, 1) = 1.0;
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = i + 1; j < 6; ++j) {
        Mat sys(2, 2, {rows(i, 0), rows(i, 1), rows(j, 0), rows(j, 1)});
        std::vector<double> x(2, 0.0);
        if (!solve_square(sys, {rhs[i], rhs[j]}, x, 1e-9)) continue;
        bool feasible = x[0] >= -1e-9 && x[1] >= -1e-9;
        for (std::size_t r = 0; r < 4 && feasible; ++r)
          feasible = lp.a(r, 0) * x[0] + lp.a(r, 1) * x[1] <= lp.b[r] + 1e-9;
        if (feasible) best = std::min(best, lp.c[0] * x[0] + lp.c[1] * x[1]);
      }
    CHECK(sol.objective == doctest::Approx(best).epsilon(1e-7));
  }
}
