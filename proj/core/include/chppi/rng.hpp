#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace chppi {

// Stream splitting: deriving an independent seed from (seed, key) keeps
// per-entity draws stable no matter how work is sliced across threads.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

// mt19937_64 behind fixed value derivations. The standard distributions are
// implementation-defined, so uniform/normal/below are pinned here: outputs
// are identical on every platform for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0,1) with 53 random bits
  double uniform();
  double uniform(double lo, double hi);

  // [0,n), n > 0; negligible modulo bias at the sizes used here
  std::uint64_t below(std::uint64_t n);

  // standard normal through the inverse CDF, so values depend only on the
  // uniform stream
  double normal();

  // true with probability p
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace chppi
