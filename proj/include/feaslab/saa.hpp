#pragma once

#include <optional>
#include <span>
#include <vector>

#include "feaslab/chain_domain.hpp"
#include "feaslab/cone.hpp"
#include "feaslab/linalg.hpp"
#include "feaslab/rng.hpp"

namespace feaslab {

/// Compact box [lo, hi]^n; the deterministic part of X.
struct BoxSet {
  Vector lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const;
  Vector center() const;
};

/// Additional affine rows G x <= g of X.
struct AffineIneq {
  Matrix G;
  Vector g;
};

/// Config-expressible objective families for the convex path.
struct ObjectiveSpec {
  enum class Kind {
    linear,          // c'x, deterministic
    quadratic_diag,  // sum_i w_i (x_i - z_i)^2, deterministic
    abs_deviation,   // |a'x - xi| with xi ~ law
    scaled_linear,   // xi * (a'x) with xi ~ law
    linear_abs,      // c'x + |a'x - xi| with xi ~ law
  };
  Kind kind = Kind::linear;
  Vector c;                            // linear / linear_abs
  Vector weights, center;              // quadratic_diag
  Vector a;                            // abs_deviation / scaled_linear / linear_abs
  std::optional<ScalarDistribution> law;

  bool sampled() const {
    return kind == Kind::abs_deviation || kind == Kind::scaled_linear ||
           kind == Kind::linear_abs;
  }
  void validate(int dim) const;

  double term_value(std::span<const double> x, double draw) const;
  Vector term_subgradient(std::span<const double> x, double draw) const;
  /// Closed-form expectation when available.
  std::optional<double> expectation(std::span<const double> x) const;
};

/// Two-stage linear recourse data: first-stage cost c, second-stage cost g,
/// recourse matrix W, technology matrix T, and the law of h (independent
/// components).
struct TwoStageLP {
  Vector c;
  Vector g;
  Matrix W;
  Matrix T;
  std::vector<ScalarDistribution> h_laws;
};

/// A stochastic program  inf_{x in X} E[f_xi(x)]  at desk scale. Exactly one
/// of {objective over a chain domain, two-stage recourse} shapes the random
/// part; X is a compact box plus optional affine rows.
struct StochasticProblem {
  int dim = 0;
  BoxSet box;
  std::optional<AffineIneq> x_ineq;
  ObjectiveSpec objective;
  std::optional<ChainDomainSpec> domain;
  std::optional<TwoStageLP> recourse;

  bool two_stage() const { return recourse.has_value(); }

  /// Validates shapes and the standing assumption that dom F intersects X
  /// (checked with the feasibility oracle on essential-infimum thresholds).
  void validate() const;
};

/// An assembled SAA problem: the sample, realized objective data, and (for
/// two-stage problems) the list of h realizations.
struct SAAInstance {
  const StochasticProblem* problem = nullptr;
  std::int64_t N = 0;
  ThresholdSample thresholds;        // present when the problem has a chain domain
  std::vector<double> objective_draws;  // one draw per sample for sampled objectives
  std::vector<Vector> h_draws;          // two-stage right-hand sides
  ConeGenerators recourse_cone;         // rays of {a : a'W >= 0} for two-stage

  double objective_value(std::span<const double> x) const;
  Vector objective_subgradient(std::span<const double> x) const;
};

SAAInstance assemble_saa(const StochasticProblem& problem, std::int64_t N,
                         const SeedSpec& seed);

struct SAASolution {
  Vector x;
  double value = 0.0;
  double gap = 0.0;                  // certified optimality gap (convex path)
  double feasibility_residual = 0.0; // worst violation of the SAA domain at x
  bool saa_infeasible = false;       // SAA domain does not meet X
  bool gap_exceeded = false;         // iteration cap hit before reaching tol
  int iterations = 0;
};

/// Kelley cutting-plane solver over the SAA domain. Affine constraints enter
/// the master LP directly; quadratic/norm chains and the objective are outer-
/// approximated by subgradient cuts until the certified gap falls below tol.
SAASolution solve_convex(const SAAInstance& instance, double tol);

/// Deterministic-equivalent LP for two-stage instances, followed by a
/// lexicographic refinement of the first-stage point among optimal solutions.
SAASolution solve_two_stage(const SAAInstance& instance);

/// Feasibility oracle for {x in box : G x <= g, fns[k](x) <= rhs[k]}.
/// Affine members become LP rows; the rest is handled by cutting planes on
/// the max-violation function.
std::optional<Vector> find_feasible_point(const BoxSet& box,
                                          const std::optional<AffineIneq>& ineq,
                                          const std::vector<const ConstraintFn*>& fns,
                                          std::span<const double> rhs, double tol = 1e-8);

struct DeviationEstimate {
  double max_deviation = 0.0;
  double reference_stderr = 0.0;  // 0 when the expectation is closed-form
};

/// sup-type diagnostic max_{x in grid} |F_hat_N(x) - F(x)| with F evaluated
/// in closed form when available, otherwise by an independent Monte Carlo
/// reference of size M_ref.
DeviationEstimate estimate_uniform_deviation(const SAAInstance& instance,
                                             const std::vector<Vector>& grid,
                                             std::int64_t M_ref, const SeedSpec& ref_seed);

}  // namespace feaslab
