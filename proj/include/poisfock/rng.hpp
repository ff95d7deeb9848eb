#pragma once

#include <cstdint>
#include <limits>

namespace poisfock {

/// SplitMix64 stream keyed by (seed, stream index). The output is a hash of a
/// counter, so draw d of a batch depends only on (seed, d) and never on how
/// draws are scheduled across threads.
class CounterRng {
public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;

private:
  std::uint64_t state_;
};

/// Poisson(lambda) variate: sequential inversion below 30, PTRS transformed
/// rejection (Hoermann 1993) at and above.
int sample_poisson_variate(double lambda, CounterRng& rng);

}  // namespace poisfock
