#pragma once

#include <memory>
#include <string>
#include <vector>

#include "feaslab/rng.hpp"

namespace feaslab {

enum class DistFamily { uniform, exponential, normal, discrete, shifted_scaled };

/// A sampleable scalar law with CDF and beta-quantile. Immutable after
/// construction; parameters are validated eagerly:
///   uniform(a, b)       requires b > a
///   exponential(rate)   requires rate > 0
///   normal(mean, sd)    requires sd > 0
///   discrete(v, p)      requires |sum p - 1| <= 1e-12, p >= 0; zero-probability
///                       atoms are dropped and duplicates merged
///   shifted_scaled      requires scale > 0 (order-preserving wrapper)
class ScalarDistribution {
 public:
  static ScalarDistribution uniform(double a, double b);
  static ScalarDistribution exponential(double rate);
  static ScalarDistribution normal(double mean, double sd);
  static ScalarDistribution discrete(std::vector<double> values, std::vector<double> probs);
  static ScalarDistribution point_mass(double v) { return discrete({v}, {1.0}); }
  static ScalarDistribution shifted_scaled(ScalarDistribution inner, double shift, double scale);

  DistFamily family() const { return family_; }

  /// P{X <= t}, right-continuous in t.
  double cdf(double t) const;

  /// P{X < t}; differs from cdf only at atoms.
  double prob_lt(double t) const;

  /// P{X >= t} = 1 - prob_lt(t); includes the atom at t.
  double prob_ge(double t) const { return 1.0 - prob_lt(t); }

  /// Upper beta-quantile inf{t : P{X <= t} > beta}, beta in [0, 1).
  /// beta = 0 yields the essential infimum (may be -inf for the normal family).
  double quantile_beta(double beta) const;

  double essential_infimum() const { return quantile_beta(0.0); }

  double mean() const;

  /// Inverse-CDF sampling; one uniform consumed per draw.
  double sample(RngStream& stream) const { return quantile_beta(stream.uniform_open01()); }

  /// True when the CDF is continuous and strictly increasing on its support
  /// (uniform, exponential, normal and their shifted/scaled wrappers).
  bool continuous_strictly_increasing() const;

  // Parameter accessors (used by serialization).
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  const std::vector<double>& atoms() const { return atoms_; }
  const std::vector<double>& atom_probs() const { return probs_; }
  const ScalarDistribution& inner() const;

  std::string describe() const;

 private:
  ScalarDistribution() = default;

  DistFamily family_ = DistFamily::uniform;
  double a_ = 0.0;  // uniform a / exponential rate / normal mean / shift
  double b_ = 1.0;  // uniform b / normal sd / scale
  std::vector<double> atoms_;
  std::vector<double> probs_;
  std::vector<double> cum_;  // cumulative atom probabilities
  std::shared_ptr<const ScalarDistribution> inner_;
};

/// Quantile of the standard normal law for p in (0, 1).
double standard_normal_quantile(double p);

}  // namespace feaslab
