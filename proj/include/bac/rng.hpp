#pragma once

#include <cstdint>

namespace bac {

// SplitMix64 (Steele, Lea & Flood 2014). One 64-bit word of state, so a run
// can be reproduced in any language from the seed alone. Uniform doubles take
// the top 53 bits; normals use the Box-Muller transform without caching the
// second deviate, so each normal() consumes exactly two words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next_u64();

  // [0, 1)
  double uniform();
  // [lo, hi)
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

// Independent streams carved out of one experiment seed.
enum class Stream : std::uint64_t {
  kInit = 1,
  kNoise = 2,
  kPlan = 3,
  kStart = 4,
  kExplore = 5,
  kEval = 6,
};

// Mixes (seed, stream) through the SplitMix64 finalizer so that neighbouring
// seeds and stream ids give unrelated sequences.
Rng make_stream(std::uint64_t seed, Stream stream);

}  // namespace bac
