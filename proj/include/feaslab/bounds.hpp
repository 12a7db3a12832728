#pragma once

#include <cstdint>
#include <span>

namespace feaslab {

/// Parameters of one probability bound evaluation: chain order (or active-set
/// size, or extreme-ray count) m, sample size N, and threshold alpha.
struct BoundInput {
  std::int64_t m = 1;
  std::int64_t N = 1;
  double alpha = 0.0;
};

/// Lower binomial tail  sum_{k=0}^{m-1} C(N,k) alpha^k (1-alpha)^{N-k},
/// evaluated in log space with compensated summation. Requires 1 <= m <= N
/// and alpha in [0,1]. Edge cases: alpha = 0 gives 1, alpha = 1 gives 0.
double binomial_tail(std::int64_t m, std::int64_t N, double alpha);

/// Chernoff upper estimate exp{-(N*alpha - m + 1)^2 / (2*N*alpha)} of the
/// binomial tail; requires N*alpha >= m - 1 and alpha > 0.
double chernoff_estimate(std::int64_t m, std::int64_t N, double alpha);

/// Product lower bound prod_t (1 - binomial_tail(m_t, N_t, alpha_t)),
/// using sum_{k=m}^{N} = 1 - sum_{k=0}^{m-1}.
double multistage_product(std::span<const BoundInput> inputs);

}  // namespace feaslab
