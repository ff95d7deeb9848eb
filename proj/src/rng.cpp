#include "poisfock/rng.hpp"

#include <cmath>

#include "poisfock/errors.hpp"

namespace poisfock {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int poisson_inversion(double lambda, CounterRng& rng) {
  const double u = rng.uniform();
  double p = std::exp(-lambda);
  double cdf = p;
  int x = 0;
  while (u > cdf) {
    ++x;
    p *= lambda / x;
    cdf += p;
    if (p == 0.0 && u > cdf) break;  // u beyond the representable cdf; stop at the far tail
  }
  return x;
}

int poisson_ptrs(double lambda, CounterRng& rng) {
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<int>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(invalpha) - std::log(a / (us * us) + b) <= -lambda + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<int>(k);
    }
  }
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(seed + kGolden) ^ mix64(stream * kGolden + 0x632be59bd9b4e019ULL)) {}

CounterRng::result_type CounterRng::operator()() noexcept {
  state_ += kGolden;
  return mix64(state_);
}

double CounterRng::uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

int sample_poisson_variate(double lambda, CounterRng& rng) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson mean must be finite and positive");
  return lambda < 30.0 ? poisson_inversion(lambda, rng) : poisson_ptrs(lambda, rng);
}

}  // namespace poisfock
