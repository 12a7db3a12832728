#include "feaslab/rng.hpp"

namespace feaslab {

namespace {
constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z += kGamma;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t RngStream::next_u64() {
  state_ += kGamma;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream RngStream::substream(std::uint64_t tag) const {
  return RngStream(mix64(seed_ ^ mix64(tag ^ 0x5851f42d4c957f2dULL)));
}

std::uint64_t derive_seed(const SeedSpec& spec) {
  std::uint64_t s = mix64(spec.master_seed ^ 0x243f6a8885a308d3ULL);
  s = mix64(s ^ mix64(spec.trial_index ^ 0x13198a2e03707344ULL));
  s = mix64(s ^ mix64(static_cast<std::uint64_t>(spec.stage_index) ^ 0xa4093822299f31d0ULL));
  s = mix64(s ^ mix64(static_cast<std::uint64_t>(spec.role) ^ 0x082efa98ec4e6c89ULL));
  return s;
}

RngStream make_stream(const SeedSpec& spec) { return RngStream(derive_seed(spec)); }

}  // namespace feaslab
