#pragma once

#include <cstdint>

#include "feaslab/rng.hpp"
#include "feaslab/stats.hpp"

namespace feaslab {

/// Monte Carlo estimation mode: M fresh draws from the stream keyed by seed.
struct MonteCarlo {
  std::int64_t M = 10000;
  SeedSpec seed;
};

/// Analytic (closed-form) evaluation mode.
struct Analytic {};

namespace detail {

constexpr std::int64_t kMcBlock = 8192;

/// Estimate P{pred} by M indicator draws. Work is split into fixed blocks,
/// each driven by a substream keyed only by its block index, so the estimate
/// is identical whether blocks run serially or in parallel.
template <class Pred>
ProbEstimate mc_probability(const MonteCarlo& mc, Pred&& pred) {
  if (mc.M < 1) return {0.0, 0.0};
  RngStream root = make_stream(mc.seed);
  std::int64_t hits = 0;
  const std::int64_t blocks = (mc.M + kMcBlock - 1) / kMcBlock;
  for (std::int64_t b = 0; b < blocks; ++b) {
    RngStream s = root.substream(static_cast<std::uint64_t>(b));
    const std::int64_t lo = b * kMcBlock;
    const std::int64_t hi = lo + kMcBlock < mc.M ? lo + kMcBlock : mc.M;
    for (std::int64_t i = lo; i < hi; ++i)
      if (pred(s)) ++hits;
  }
  double p = static_cast<double>(hits) / static_cast<double>(mc.M);
  return {p, freq_stderr(static_cast<std::size_t>(hits), static_cast<std::size_t>(mc.M))};
}

}  // namespace detail
}  // namespace feaslab
