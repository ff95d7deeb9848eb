#include "poisfock/intensity.hpp"

#include <cmath>
#include <string>

#include "poisfock/errors.hpp"

namespace poisfock {

FiniteIntensity::FiniteIntensity(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw DomainError("intensity needs at least one site");
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    const double w = weights_[i];
    if (!std::isfinite(w) || w <= 0.0) {
      throw DomainError("intensity weight " + std::to_string(i) + " must be finite and positive");
    }
    total_ += w;
  }
}

FiniteIntensity FiniteIntensity::scaled(double factor) const {
  std::vector<double> w(weights_);
  for (double& x : w) x *= factor;
  return FiniteIntensity(std::move(w));
}

}  // namespace poisfock
