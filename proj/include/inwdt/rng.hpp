#pragma once

#include <cstdint>
#include <random>

namespace inwdt {

// Seedable, platform-portable generator: std::mt19937_64 (whose output
// sequence is fixed by the standard) with hand-written uniform, normal and
// bounded-integer draws, since the standard distributions are
// implementation-defined.
//
// Independent streams are derived from one user seed by hashing
// (seed, stream id) through SplitMix64.
class Rng {
 public:
  enum class Stream : std::uint64_t { kBasis = 1, kDivergenceProbe = 2, kSubsample = 3 };

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng stream(std::uint64_t seed, Stream id);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Standard normal via Box-Muller; one engine draw pair per variate.
  double normal();
  // Uniform integer in [0, n), n > 0, by rejection.
  std::uint64_t below(std::uint64_t n);

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace inwdt
