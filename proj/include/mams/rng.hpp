#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mams {

/// Seedable generator with independent per-run streams: the engine state is
/// derived from (seed, stream) through std::seed_seq, so a parameter sweep
/// can give every point its own reproducible stream.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d616d73u};
    engine_.seed(seq);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mams
