#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace poisfock {

/// Intensity measure on the finite ground space {0, ..., k-1}: one positive mass per site.
class FiniteIntensity {
public:
  explicit FiniteIntensity(std::vector<double> weights);

  std::size_t sites() const noexcept { return weights_.size(); }
  double operator[](std::size_t site) const { return weights_.at(site); }
  std::span<const double> weights() const noexcept { return weights_; }

  /// lambda(Y)
  double total() const noexcept { return total_; }

  /// Intensity scaled by a positive factor (used by the time-marked split s*lambda, (1-s)*lambda).
  FiniteIntensity scaled(double factor) const;

private:
  std::vector<double> weights_;
  double total_ = 0.0;
};

}  // namespace poisfock
