#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "feaslab/distribution.hpp"
#include "feaslab/linalg.hpp"
#include "feaslab/mc.hpp"
#include "feaslab/rng.hpp"
#include "feaslab/stats.hpp"

namespace feaslab {

/// Convex constraint function c(x) used on the left side of a chain
/// c(x) <= threshold. Three shapes: affine a'x + b, convex quadratic
/// x'Qx + a'x + b (Q symmetric positive semidefinite, verified at
/// construction with a 1e-9 eigenvalue tolerance), and norm ||x - center||.
class ConstraintFn {
 public:
  enum class Kind { affine, quadratic, norm };

  static ConstraintFn affine(Vector a, double b);
  static ConstraintFn quadratic(Matrix Q, Vector a, double b);
  static ConstraintFn norm_ball(Vector center);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool is_affine() const { return kind_ == Kind::affine; }

  double eval(std::span<const double> x) const;
  Vector subgradient(std::span<const double> x) const;

  const Vector& linear_part() const { return a_; }
  double constant_part() const { return b_; }
  const Matrix& quadratic_part() const { return Q_; }
  const Vector& center() const { return center_; }

 private:
  ConstraintFn() = default;
  Kind kind_ = Kind::affine;
  int dim_ = 0;
  Vector a_;
  double b_ = 0.0;
  Matrix Q_;
  Vector center_;
};

struct ChainLink {
  ConstraintFn fn;
  ScalarDistribution law;
};

/// Chain-constrained domain  dom f_xi = {x : c_k(x) <= l_k(xi), k in [m]}.
/// Thresholds across chains are either independent or comonotone (one shared
/// uniform driver per outcome mapped through each quantile function).
struct ChainDomainSpec {
  int dim = 0;
  std::vector<ChainLink> chains;
  bool independent_thresholds = true;

  int order() const { return static_cast<int>(chains.size()); }

  /// Checks m >= 1, matching dimensions, and (l_k)_0 > -inf for every chain.
  void validate() const;

  /// dom F = {x : c_k(x) <= (l_k)_0 for all k}: essential-infimum thresholds.
  Vector essential_thresholds() const;
};

/// Realized thresholds of an i.i.d. sample: N x m values plus per-chain
/// column minima (the SAA domain thresholds). For comonotone sampling the
/// row drivers are retained.
struct ThresholdSample {
  std::int64_t N = 0;
  int m = 0;
  std::vector<double> values;   // row-major N x m
  Vector minima;                // length m
  std::vector<double> drivers;  // length N when comonotone, else empty

  double value(std::int64_t i, int k) const {
    return values[static_cast<std::size_t>(i) * m + k];
  }
  Vector recompute_minima() const;
};

ThresholdSample sample_thresholds(const ChainDomainSpec& spec, std::int64_t N,
                                  const SeedSpec& seed);

/// Appends the rows of `extra` to `base` (same spec), updating minima.
ThresholdSample append_rows(const ThresholdSample& base, const ThresholdSample& extra);

/// Membership x in {y : c_k(y) <= thresholds[k] for all k}; non-strict.
bool domain_contains(const ChainDomainSpec& spec, std::span<const double> x,
                     std::span<const double> thresholds);

/// Degree of feasibility d(x) = P{c_k(x) <= l_k(xi) for all k}.
/// Analytic mode requires independent thresholds and evaluates
/// prod_k P{l_k >= c_k(x)} (atom at c_k(x) included).
ProbEstimate dof_point(const ChainDomainSpec& spec, std::span<const double> x, Analytic);
ProbEstimate dof_point(const ChainDomainSpec& spec, std::span<const double> x,
                       const MonteCarlo& mc);

/// Chain lower bound  P{l_k(xi) >= minima[k] for all k}.
ProbEstimate dfrak_r(const ChainDomainSpec& spec, const ThresholdSample& sample, Analytic);
ProbEstimate dfrak_r(const ChainDomainSpec& spec, const ThresholdSample& sample,
                     const MonteCarlo& mc);

/// Estimate of the degree of feasibility of the SAA domain. Containment is
/// tested through per-chain threshold comparison (sufficient for set
/// containment of functional chains).
ProbEstimate dof_domain(const ChainDomainSpec& spec, const ThresholdSample& sample,
                        const MonteCarlo& mc);

/// Exact evaluations under the comonotone coupling (thresholds share one
/// uniform driver): the joint event reduces to the worst chain. Only valid
/// for comonotone specs.
double dof_point_comonotone_exact(const ChainDomainSpec& spec, std::span<const double> x);
double dfrak_r_comonotone_exact(const ChainDomainSpec& spec, const ThresholdSample& sample);

}  // namespace feaslab
