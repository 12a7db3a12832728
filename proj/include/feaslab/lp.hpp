#pragma once

#include <limits>

#include "feaslab/linalg.hpp"

namespace feaslab {

enum class RowSense { le, eq, ge };

enum class LPStatus { optimal, infeasible, unbounded };

/// min c'x  s.t.  A x {<=,=,>=} b,  lower <= x <= upper.
/// Bounds may be +-infinity; empty bound vectors default to free variables.
struct LPProblem {
  Vector c;
  Matrix A;
  Vector b;
  std::vector<RowSense> sense;
  Vector lower;
  Vector upper;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return A.rows; }
};

struct LPResult {
  LPStatus status = LPStatus::infeasible;
  double value = std::numeric_limits<double>::quiet_NaN();
  Vector x;     // primal point (original variables)
  Vector dual;  // row duals y with c - A'y matching bound multipliers
  int iterations = 0;
};

/// Two-phase bounded-variable simplex with Bland's rule. Throws
/// std::invalid_argument on malformed or oversized input (> 10^4 structural
/// nonzeros) and SolverError if the anti-cycling iteration guard trips.
LPResult lp_solve(const LPProblem& problem);

/// Feasibility of {x : A x {sense} b, lower <= x <= upper} via phase 1 only.
bool lp_feasible(const LPProblem& problem);

}  // namespace feaslab
