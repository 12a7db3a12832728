#include <doctest.h>

#include <cmath>
#include <limits>

#include "feaslab/errors.hpp"
#include "feaslab/lp.hpp"
#include "feaslab/rng.hpp"

using namespace feaslab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Optimality sanity: primal feasibility within 1e-7 and row complementary
// slackness within 1e-6.
void check_optimal(const LPProblem& p, const LPResult& r) {
  REQUIRE(r.status == LPStatus::optimal);
  Vector ax = p.A.multiply(r.x);
  for (int i = 0; i < p.num_rows(); ++i) {
    double resid = ax[static_cast<std::size_t>(i)] - p.b[static_cast<std::size_t>(i)];
    switch (p.sense[static_cast<std::size_t>(i)]) {
      case RowSense::le: CHECK(resid <= 1e-7); break;
      case RowSense::ge: CHECK(resid >= -1e-7); break;
      case RowSense::eq: CHECK(std::abs(resid) <= 1e-7); break;
    }
    CHECK(std::abs(r.dual[static_cast<std::size_t>(i)] * resid) <= 1e-6);
  }
  for (int j = 0; j < p.num_vars(); ++j) {
    if (!p.lower.empty() && std::isfinite(p.lower[static_cast<std::size_t>(j)]))
      CHECK(r.x[static_cast<std::size_t>(j)] >= p.lower[static_cast<std::size_t>(j)] - 1e-7);
    if (!p.upper.empty() && std::isfinite(p.upper[static_cast<std::size_t>(j)]))
      CHECK(r.x[static_cast<std::size_t>(j)] <= p.upper[static_cast<std::size_t>(j)] + 1e-7);
  }
}

}  // namespace

TEST_CASE("min x subject to x >= 3") {
  LPProblem p;
  p.c = {1.0};
  p.A = Matrix{{1.0}};
  p.b = {3.0};
  p.sense = {RowSense::ge};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(3.0));
}

TEST_CASE("infeasible system is detected") {
  LPProblem p;
  p.c = {0.0};
  p.A = Matrix{{1.0}};
  p.b = {-1.0};
  p.sense = {RowSense::le};
  p.lower = {0.0};
  p.upper = {kInf};
  CHECK(lp_solve(p).status == LPStatus::infeasible);
  CHECK_FALSE(lp_feasible(p));
}

TEST_CASE("vertex of a 1-D feasible ray") {
  LPProblem p;
  p.c = {1.0, 1.0};
  p.A = Matrix{{1.0, -1.0}};
  p.b = {1.0};
  p.sense = {RowSense::eq};
  p.lower = {0.0, 0.0};
  p.upper = {kInf, kInf};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.x[0] == doctest::Approx(1.0));
  CHECK(r.x[1] == doctest::Approx(0.0));
}

TEST_CASE("unbounded problem is detected") {
  LPProblem p;
  p.c = {-1.0};
  p.A = Matrix{{1.0}};
  p.b = {0.0};
  p.sense = {RowSense::ge};
  p.lower = {0.0};
  p.upper = {kInf};
  CHECK(lp_solve(p).status == LPStatus::unbounded);
}

TEST_CASE("free variables and upper bounds") {
  // min x + y, x free with x + y >= 2, x <= 5, y in [0, 1].
  LPProblem p;
  p.c = {1.0, 1.0};
  p.A = Matrix{{1.0, 1.0}};
  p.b = {2.0};
  p.sense = {RowSense::ge};
  p.lower = {-kInf, 0.0};
  p.upper = {5.0, 1.0};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("bounded-variable optimum sits at a bound") {
  // max x1 + 2*x2 over the box with a coupling row.
  LPProblem p;
  p.c = {-1.0, -2.0};
  p.A = Matrix{{1.0, 1.0}};
  p.b = {1.5};
  p.sense = {RowSense::le};
  p.lower = {0.0, 0.0};
  p.upper = {1.0, 1.0};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(-2.5));
  CHECK(r.x[1] == doctest::Approx(1.0));
  CHECK(r.x[0] == doctest::Approx(0.5));
}

TEST_CASE("equality rows with mixed senses") {
  // min -x - y st x + y <= 3, x - y = 1, y >= 0.5.
  LPProblem p;
  p.c = {-1.0, -1.0};
  p.A = Matrix{{1.0, 1.0}, {1.0, -1.0}, {0.0, 1.0}};
  p.b = {3.0, 1.0, 0.5};
  p.sense = {RowSense::le, RowSense::eq, RowSense::ge};
  p.lower = {0.0, 0.0};
  p.upper = {kInf, kInf};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(-3.0));
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(1.0));
}

TEST_CASE("redundant equality rows do not break phase 1") {
  LPProblem p;
  p.c = {1.0, 0.0};
  p.A = Matrix{{1.0, 1.0}, {2.0, 2.0}};
  p.b = {1.0, 2.0};
  p.sense = {RowSense::eq, RowSense::eq};
  p.lower = {0.0, 0.0};
  p.upper = {kInf, kInf};
  LPResult r = lp_solve(p);
  check_optimal(p, r);
  CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("randomized instances: optimal basis is primal feasible") {
  RngStream s = make_stream({7771, 0, 0, StreamRole::oracle});
  int solved = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n = 2 + static_cast<int>(s.uniform01() * 4);
    int mrows = 1 + static_cast<int>(s.uniform01() * 4);
    LPProblem p;
    p.c.resize(static_cast<std::size_t>(n));
    for (double& v : p.c) v = 2.0 * s.uniform01() - 1.0;
    p.A = Matrix(mrows, n);
    for (int i = 0; i < mrows; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = std::round((2.0 * s.uniform01() - 1.0) * 4.0) / 2.0;
    p.b.resize(static_cast<std::size_t>(mrows));
    for (double& v : p.b) v = 2.0 * s.uniform01();
    p.sense.assign(static_cast<std::size_t>(mrows), RowSense::le);
    for (int i = 0; i < mrows; ++i)
      if (s.uniform01() < 0.3) p.sense[static_cast<std::size_t>(i)] = RowSense::ge;
    p.lower.assign(static_cast<std::size_t>(n), 0.0);
    p.upper.assign(static_cast<std::size_t>(n), 3.0);
    LPResult r = lp_solve(p);
    if (r.status == LPStatus::optimal) {
      check_optimal(p, r);
      ++solved;
    }
  }
  CHECK(solved > 100);  // boxes keep most random instances solvable
}

TEST_CASE("oversized input is rejected") {
  LPProblem p;
  int n = 101;
  p.c.assign(static_cast<std::size_t>(n), 1.0);
  p.A = Matrix(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.A(i, j) = 1.0;  // 10201 nonzeros > 10^4
  p.b.assign(static_cast<std::size_t>(n), 1.0);
  p.sense.assign(static_cast<std::size_t>(n), RowSense::le);
  CHECK_THROWS_AS(lp_solve(p), std::invalid_argument);
}

TEST_CASE("randomized box LPs: value matches a grid-search oracle") {
  // Feasible grid points bound the optimum from above; the LP value plus a
  // Lipschitz slack bounds it from below at the grid resolution.
  RngStream s = make_stream({7772, 0, 0, StreamRole::oracle});
  const double step = 0.05;
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    int n = 2;
    int mrows = 1 + static_cast<int>(s.uniform01() * 3);
    LPProblem p;
    p.c = {2.0 * s.uniform01() - 1.0, 2.0 * s.uniform01() - 1.0};
    p.A = Matrix(mrows, n);
    for (int i = 0; i < mrows; ++i)
      for (int j = 0; j < n; ++j) p.A(i, j) = std::round((2.0 * s.uniform01() - 1.0) * 4.0) / 2.0;
    p.b.resize(static_cast<std::size_t>(mrows));
    for (double& v : p.b) v = 2.0 * s.uniform01() - 0.5;
    p.sense.assign(static_cast<std::size_t>(mrows), RowSense::le);
    p.lower = {0.0, 0.0};
    p.upper = {1.0, 1.0};

    LPResult r = lp_solve(p);
    double grid_min = std::numeric_limits<double>::infinity();
    for (double x0 = 0.0; x0 <= 1.0 + 1e-12; x0 += step) {
      for (double x1 = 0.0; x1 <= 1.0 + 1e-12; x1 += step) {
        bool ok = true;
        for (int i = 0; i < mrows && ok; ++i)
          if (p.A(i, 0) * x0 + p.A(i, 1) * x1 > p.b[static_cast<std::size_t>(i)] + 1e-12)
            ok = false;
        if (ok) grid_min = std::min(grid_min, p.c[0] * x0 + p.c[1] * x1);
      }
    }
    if (r.status == LPStatus::optimal) {
      REQUIRE(std::isfinite(grid_min));  // the optimum's neighborhood is on the grid
      double lipschitz = std::abs(p.c[0]) + std::abs(p.c[1]);
      CHECK(r.value <= grid_min + 1e-9);
      CHECK(r.value >= grid_min - step * lipschitz - 1e-9);
      ++solved;
    } else {
      // Grid feasibility would contradict LP infeasibility only if a grid
      // point satisfies the rows strictly; allow boundary-tolerance misses.
      if (std::isfinite(grid_min)) {
        bool strictly_interior = false;
        for (double x0 = 0.0; x0 <= 1.0 + 1e-12 && !strictly_interior; x0 += step)
          for (double x1 = 0.0; x1 <= 1.0 + 1e-12 && !strictly_interior; x1 += step) {
            bool ok = true;
            for (int i = 0; i < mrows && ok; ++i)
              if (p.A(i, 0) * x0 + p.A(i, 1) * x1 > p.b[static_cast<std::size_t>(i)] - 1e-7)
                ok = false;
            strictly_interior = ok;
          }
        CHECK_FALSE(strictly_interior);
      }
    }
  }
  CHECK(solved >= 30);
}
