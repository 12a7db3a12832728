#pragma once

#include <cstdint>

namespace feaslab {

/// Which logical stream of randomness a consumer draws from. Distinct roles
/// under the same (master_seed, trial_index, stage_index) are independent.
enum class StreamRole : std::uint32_t {
  threshold = 0,  // constraint threshold realizations
  objective = 1,  // sampled objective data
  oracle = 2,     // Monte Carlo probability estimators
};

/// Coordinates of a random stream. Streams are derived by hashing the fields,
/// so any (trial, stage, role) combination can be opened in any order, on any
/// worker, and always yields the same draw sequence.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;
  std::uint32_t stage_index = 0;
  StreamRole role = StreamRole::threshold;
};

/// Counter-based generator (splitmix64). State is a single 64-bit counter;
/// output depends only on the seed and the number of draws made, never on
/// scheduling. Cheap to fork: substream(tag) derives an independent stream
/// from the immutable seed, regardless of how much this stream has consumed.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform draw in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform draw in the open interval (0, 1); safe to feed quantile
  /// functions of laws with unbounded support.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Independent stream keyed by (seed of this stream, tag).
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

/// 64-bit finalizer used for all seed derivation.
std::uint64_t mix64(std::uint64_t z);

/// Collapse a SeedSpec into the 64-bit seed of its stream.
std::uint64_t derive_seed(const SeedSpec& spec);

RngStream make_stream(const SeedSpec& spec);

}  // namespace feaslab
