#include "feaslab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace feaslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

double normal_cdf01(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double standard_normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, "standard_normal_quantile: p must lie in (0,1)");
  // Acklam's rational approximation followed by one Halley refinement.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf01(x) - p;
  double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

ScalarDistribution ScalarDistribution::uniform(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b), "uniform: parameters must be finite");
  require(b > a, "uniform: requires b > a");
  ScalarDistribution d;
  d.family_ = DistFamily::uniform;
  d.a_ = a;
  d.b_ = b;
  return d;
}

ScalarDistribution ScalarDistribution::exponential(double rate) {
  require(std::isfinite(rate) && rate > 0.0, "exponential: requires rate > 0");
  ScalarDistribution d;
  d.family_ = DistFamily::exponential;
  d.a_ = rate;
  return d;
}

ScalarDistribution ScalarDistribution::normal(double mean, double sd) {
  require(std::isfinite(mean) && std::isfinite(sd), "normal: parameters must be finite");
  require(sd > 0.0, "normal: requires sd > 0");
  ScalarDistribution d;
  d.family_ = DistFamily::normal;
  d.a_ = mean;
  d.b_ = sd;
  return d;
}

ScalarDistribution ScalarDistribution::discrete(std::vector<double> values,
                                                std::vector<double> probs) {
  require(!values.empty(), "discrete: needs at least one atom");
  require(values.size() == probs.size(), "discrete: values/probs size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    require(std::isfinite(values[i]), "discrete: atom must be finite");
    require(std::isfinite(probs[i]) && probs[i] >= 0.0, "discrete: probs must be >= 0");
    total += probs[i];
  }
  require(std::abs(total - 1.0) <= 1e-12, "discrete: probs must sum to 1 within 1e-12");

  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

  ScalarDistribution d;
  d.family_ = DistFamily::discrete;
  for (std::size_t idx : order) {
    if (probs[idx] == 0.0) continue;
    if (!d.atoms_.empty() && values[idx] == d.atoms_.back()) {
      d.probs_.back() += probs[idx];
    } else {
      d.atoms_.push_back(values[idx]);
      d.probs_.push_back(probs[idx]);
    }
  }
  require(!d.atoms_.empty(), "discrete: all atoms have zero probability");
  long double cum = 0.0L;
  d.cum_.reserve(d.probs_.size());
  for (double p : d.probs_) {
    cum += p;
    d.cum_.push_back(static_cast<double>(cum));
  }
  d.cum_.back() = 1.0;
  return d;
}

ScalarDistribution ScalarDistribution::shifted_scaled(ScalarDistribution inner, double shift,
                                                      double scale) {
  require(std::isfinite(shift) && std::isfinite(scale), "shifted_scaled: finite parameters");
  require(scale > 0.0, "shifted_scaled: requires scale > 0");
  ScalarDistribution d;
  d.family_ = DistFamily::shifted_scaled;
  d.a_ = shift;
  d.b_ = scale;
  d.inner_ = std::make_shared<const ScalarDistribution>(std::move(inner));
  return d;
}

const ScalarDistribution& ScalarDistribution::inner() const {
  if (!inner_) throw std::logic_error("inner(): not a shifted_scaled distribution");
  return *inner_;
}

double ScalarDistribution::cdf(double t) const {
  if (std::isnan(t)) throw std::invalid_argument("cdf: t is NaN");
  switch (family_) {
    case DistFamily::uniform:
      if (t < a_) return 0.0;
      if (t >= b_) return 1.0;
      return (t - a_) / (b_ - a_);
    case DistFamily::exponential:
      if (t <= 0.0) return 0.0;
      return -std::expm1(-a_ * t);
    case DistFamily::normal:
      return normal_cdf01((t - a_) / b_);
    case DistFamily::discrete: {
      auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t);
      if (it == atoms_.begin()) return 0.0;
      return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
    case DistFamily::shifted_scaled:
      return inner_->cdf((t - a_) / b_);
  }
  return 0.0;
}

double ScalarDistribution::prob_lt(double t) const {
  if (std::isnan(t)) throw std::invalid_argument("prob_lt: t is NaN");
  switch (family_) {
    case DistFamily::discrete: {
      auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t);
      if (it == atoms_.begin()) return 0.0;
      return cum_[static_cast<std::size_t>(it - atoms_.begin()) - 1];
    }
    case DistFamily::shifted_scaled:
      return inner_->prob_lt((t - a_) / b_);
    default:
      return cdf(t);  // continuous families have no atoms
  }
}

double ScalarDistribution::quantile_beta(double beta) const {
  require(beta >= 0.0 && beta < 1.0, "quantile_beta: beta must lie in [0,1)");
  switch (family_) {
    case DistFamily::uniform:
      return a_ + beta * (b_ - a_);
    case DistFamily::exponential:
      return -std::log1p(-beta) / a_;
    case DistFamily::normal:
      if (beta == 0.0) return -kInf;
      return a_ + b_ * standard_normal_quantile(beta);
    case DistFamily::discrete: {
      // First atom whose cumulative probability strictly exceeds beta.
      auto it = std::upper_bound(cum_.begin(), cum_.end(), beta);
      return atoms_[static_cast<std::size_t>(it - cum_.begin())];
    }
    case DistFamily::shifted_scaled: {
      double q = inner_->quantile_beta(beta);
      return a_ + b_ * q;
    }
  }
  return 0.0;
}

double ScalarDistribution::mean() const {
  switch (family_) {
    case DistFamily::uniform:
      return 0.5 * (a_ + b_);
    case DistFamily::exponential:
      return 1.0 / a_;
    case DistFamily::normal:
      return a_;
    case DistFamily::discrete: {
      long double s = 0.0L;
      for (std::size_t i = 0; i < atoms_.size(); ++i) s += (long double)atoms_[i] * probs_[i];
      return static_cast<double>(s);
    }
    case DistFamily::shifted_scaled:
      return a_ + b_ * inner_->mean();
  }
  return 0.0;
}

bool ScalarDistribution::continuous_strictly_increasing() const {
  switch (family_) {
    case DistFamily::uniform:
    case DistFamily::exponential:
    case DistFamily::normal:
      return true;
    case DistFamily::discrete:
      return false;
    case DistFamily::shifted_scaled:
      return inner_->continuous_strictly_increasing();
  }
  return false;
}

std::string ScalarDistribution::describe() const {
  std::ostringstream os;
  switch (family_) {
    case DistFamily::uniform:
      os << "uniform(" << a_ << "," << b_ << ")";
      break;
    case DistFamily::exponential:
      os << "exponential(" << a_ << ")";
      break;
    case DistFamily::normal:
      os << "normal(" << a_ << "," << b_ << ")";
      break;
    case DistFamily::discrete:
      os << "discrete[" << atoms_.size() << " atoms]";
      break;
    case DistFamily::shifted_scaled:
      os << inner_->describe() << "*" << b_ << "+" << a_;
      break;
  }
  return os.str();
}

}  // namespace feaslab
