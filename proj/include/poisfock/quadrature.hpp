#pragma once

#include <vector>

namespace poisfock {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for polynomials of degree <= 2n - 1.
QuadratureRule gauss_legendre_unit(int n);

}  // namespace poisfock
