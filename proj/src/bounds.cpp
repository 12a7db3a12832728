#include "feaslab/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace feaslab {

namespace {

void check_input(std::int64_t m, std::int64_t N, double alpha) {
  if (m < 1 || m > N) throw std::invalid_argument("binomial_tail: requires 1 <= m <= N");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw std::invalid_argument("binomial_tail: alpha must lie in [0,1]");
}

}  // namespace

double binomial_tail(std::int64_t m, std::int64_t N, double alpha) {
  check_input(m, N, alpha);
  if (alpha == 0.0) return 1.0;  // only the k = 0 term survives and equals 1
  if (alpha == 1.0) return 0.0;  // all mass sits at k = N >= m

  const long double la = logl((long double)alpha);
  const long double l1a = log1pl(-(long double)alpha);

  // Term exponents via the incremental log binomial coefficient; m is at most
  // N <= 1e5 at desk scale, so materializing them is cheap.
  std::vector<long double> expo;
  expo.reserve(static_cast<std::size_t>(m));
  long double lchoose = 0.0L;
  long double emax = -std::numeric_limits<long double>::infinity();
  for (std::int64_t k = 0; k < m; ++k) {
    if (k > 0) lchoose += logl((long double)(N - k + 1)) - logl((long double)k);
    long double e = lchoose + (long double)k * la + (long double)(N - k) * l1a;
    expo.push_back(e);
    emax = std::max(emax, e);
  }
  if (!(emax > -std::numeric_limits<long double>::infinity())) return 0.0;

  long double sum = 0.0L, comp = 0.0L;
  for (long double e : expo) {
    long double term = expl(e - emax);
    long double y = term - comp;
    long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  long double result = expl(emax) * sum;
  result = std::clamp(result, 0.0L, 1.0L);
  return static_cast<double>(result);
}

double chernoff_estimate(std::int64_t m, std::int64_t N, double alpha) {
  check_input(m, N, alpha);
  if (alpha <= 0.0) throw std::invalid_argument("chernoff_estimate: requires alpha > 0");
  long double na = (long double)N * (long double)alpha;
  long double excess = na - (long double)(m - 1);
  if (excess < -1e-12L)
    throw std::invalid_argument("chernoff_estimate: requires N*alpha >= m - 1");
  if (excess < 0.0L) excess = 0.0L;
  return static_cast<double>(expl(-excess * excess / (2.0L * na)));
}

double multistage_product(std::span<const BoundInput> inputs) {
  if (inputs.empty()) throw std::invalid_argument("multistage_product: empty input list");
  long double prod = 1.0L;
  for (const BoundInput& in : inputs) {
    prod *= (1.0L - (long double)binomial_tail(in.m, in.N, in.alpha));
  }
  prod = std::clamp(prod, 0.0L, 1.0L);
  return static_cast<double>(prod);
}

}  // namespace feaslab
