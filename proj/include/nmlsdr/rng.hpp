#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace nmlsdr {

/// Portable pseudo-random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The library distributions are implementation-defined, so all
/// draws go through the helpers below, which only use raw 64-bit outputs.
///
/// Streams are split per operation: the engine seed is
/// SplitMix64(seed ^ SplitMix64(FNV-1a(stream name))). Two operations with
/// different stream names never share a sequence for the same user seed.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream);

  std::uint64_t NextU64() { return engine_(); }

  // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t UniformBelow(std::uint64_t bound);

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi);

  // Uniform double in [0, 1) with 53 random bits.
  double Uniform01();

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t k);

  // Uniform random permutation of [0, n).
  std::vector<std::size_t> Permutation(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);

// Derives a child seed, e.g. one per repetition of an experiment.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t index);

}  // namespace nmlsdr
