#pragma once

#include "feaslab/linalg.hpp"

namespace feaslab {

/// Generators of a polyhedral cone {a : a'W >= 0}: extreme rays (unit norm)
/// plus an orthonormal basis of the lineality space. The cone equals
/// span(lineality) + cone(rays). Minimality of the ray list is an invariant
/// checked by verify_generators().
struct ConeGenerators {
  int dim = 0;
  std::vector<Vector> rays;
  std::vector<Vector> lineality;

  bool complete_recourse() const { return rays.empty() && lineality.empty(); }
};

/// Extreme-ray enumeration for {a in R^d : a'W >= 0} (W is d x p, columns are
/// inequality normals) by the double description method. Desk-scale limits
/// d <= 12, p <= 24; throws std::invalid_argument beyond them, on non-finite
/// input, or when a tolerance decision is ambiguous at the 1e-9 rank
/// threshold (numerically degenerate input).
ConeGenerators enumerate_rays(const Matrix& W);

/// Farkas feasibility of {y >= 0 : W y = h - T x}: true iff every ray r of
/// {a : a'W >= 0} has r'(h - Tx) >= -1e-8 and every lineality basis vector
/// satisfies |l'(h - Tx)| <= 1e-8.
bool farkas_feasible(const ConeGenerators& gen, const Vector& h, const Matrix& T,
                     const Vector& x);

/// Same test on a precomputed v = h - Tx.
bool farkas_feasible_rhs(const ConeGenerators& gen, const Vector& v);

/// Optimal value of  inf { g'y : W y = h - T x, y >= 0 }; +infinity when the
/// second stage is infeasible. Throws SolverError when unbounded below.
double second_stage_value(const Matrix& W, const Matrix& T, const Vector& h, const Vector& g,
                          const Vector& x);

/// Value plus the subgradient -T'lambda with lambda the equality duals;
/// only meaningful at feasible x.
struct SecondStageEval {
  double value = 0.0;
  Vector subgradient;
  bool feasible = false;
};
SecondStageEval second_stage_eval(const Matrix& W, const Matrix& T, const Vector& h,
                                  const Vector& g, const Vector& x);

/// LP membership test: does v lie in span(lineality) + cone(rays)?
bool cone_contains(const ConeGenerators& gen, const Vector& v);

/// Validation used by tests: every ray satisfies the cone inequalities within
/// 1e-9 and none is a nonnegative combination of the others (checked by LP).
void verify_generators(const ConeGenerators& gen, const Matrix& W);

}  // namespace feaslab
