#include "feaslab/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace feaslab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean: empty input");
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 points");
  double m = mean(xs);
  KahanSum s;
  for (double x : xs) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(xs.size() - 1);
}

double freq_stderr(std::size_t k, std::size_t n) {
  if (n == 0) throw std::invalid_argument("freq_stderr: n = 0");
  double p = static_cast<double>(k) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

double wilson_stderr(std::size_t k, std::size_t n) {
  if (n == 0) throw std::invalid_argument("wilson_stderr: n = 0");
  // Half-width of the Wilson score interval at z = 1, which plays the role
  // of one standard error but stays positive at k = 0 and k = n.
  const double z = 1.0;
  double nn = static_cast<double>(n);
  double p = static_cast<double>(k) / nn;
  double denom = 1.0 + z * z / nn;
  double half = (z / denom) * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn));
  return half;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_line: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 points");
  double mx = mean(x), my = mean(y);
  KahanSum sxx, sxy, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx.add((x[i] - mx) * (x[i] - mx));
    sxy.add((x[i] - mx) * (y[i] - my));
    syy.add((y[i] - my) * (y[i] - my));
  }
  if (sxx.value() == 0.0) throw std::invalid_argument("fit_line: degenerate x");
  LinearFit fit;
  fit.slope = sxy.value() / sxx.value();
  fit.intercept = my - fit.slope * mx;
  fit.points = x.size();
  if (syy.value() > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += r * r;
    }
    fit.r2 = 1.0 - ss_res / syy.value();
  } else {
    fit.r2 = 1.0;
  }
  return fit;
}

}  // namespace feaslab
