#pragma once

#include <cstdint>
#include <string_view>

namespace legsim {

/// Portable, seedable random stream (xoshiro256** seeded through splitmix64).
///
/// Every consumer derives its own stream from (seed, stream name, index) via
/// `Rng::stream`, so terrain draws, domain randomization and policy sampling
/// never share state. All distributions are implemented here rather than
/// through <random> so results are bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Independent stream keyed by a module name and an index (worker, episode).
  static Rng stream(std::uint64_t seed, std::string_view name,
                    std::uint64_t index = 0);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of mantissa.
  double uniform();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller; the second variate is cached.
  double normal();
  double normal(double mean, double stddev);

 private:
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
// FNV-1a, used to turn stream names into seed offsets.
std::uint64_t hash_name(std::string_view name);

}  // namespace legsim
