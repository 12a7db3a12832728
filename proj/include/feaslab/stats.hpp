#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace feaslab {

/// Compensated (Kahan) accumulator.
class KahanSum {
 public:
  void add(double x) {
    double y = x - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Point estimate of a probability with an attached standard error.
/// Analytic quantities carry stderr 0.
struct ProbEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

double mean(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

/// Standard error of an empirical frequency k/n (binomial, plug-in).
double freq_stderr(std::size_t k, std::size_t n);

/// Wilson-score-based standard error for frequencies; behaves sensibly for
/// k near 0 or n, where the plug-in estimate collapses to zero.
double wilson_stderr(std::size_t k, std::size_t n);

/// Ordinary least squares fit y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace feaslab
