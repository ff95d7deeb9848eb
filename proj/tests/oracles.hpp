#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's expectation, difference or Charlier code.

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace oracle {

using Fn = std::function<double(std::span<const int>)>;

// e^{-lambda} lambda^n / n! by repeated multiplication.
inline double pmf(double lambda, int n) {
  double p = std::exp(-lambda);
  for (int j = 1; j <= n; ++j) p *= lambda / j;
  return p;
}

// Plain nested sum of f * prod pmf over {0..cap}^k.
inline double expectation(const Fn& f, const std::vector<double>& lambda, int cap) {
  const std::size_t k = lambda.size();
  std::vector<int> n(k, 0);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (std::size_t i = 0; i < k; ++i) w *= pmf(lambda[i], n[i]);
    total += w * f(n);
    std::size_t i = 0;
    while (i < k && ++n[i] > cap) n[i++] = 0;
    if (i == k) break;
  }
  return total;
}

inline double variance(const Fn& f, const std::vector<double>& lambda, int cap) {
  const double m = expectation(f, lambda, cap);
  return expectation([&](std::span<const int> n) { return (f(n) - m) * (f(n) - m); }, lambda, cap);
}

inline double covariance(const Fn& f, const Fn& g, const std::vector<double>& lambda, int cap) {
  const double mf = expectation(f, lambda, cap);
  const double mg = expectation(g, lambda, cap);
  return expectation([&](std::span<const int> n) { return (f(n) - mf) * (g(n) - mg); }, lambda, cap);
}

// D_{y_1} ... D_{y_m} f(at) by recursion on the first site.
inline double difference(const Fn& f, std::span<const std::size_t> sites, std::span<const int> at) {
  if (sites.empty()) return f(at);
  std::vector<int> up(at.begin(), at.end());
  ++up[sites[0]];
  const auto rest = sites.subspan(1);
  return difference(f, rest, up) - difference(f, rest, at);
}

// Charlier polynomial from its generating function coefficients:
// sum_n C_n(lambda; x) t^n / n! = e^{-t} (1 + t/lambda)^x, expanded by convolution.
inline double charlier_series(int n, double lambda, int x) {
  // coefficients of e^{-t}: (-1)^j / j!, of (1 + t/lambda)^x: binom(x, j) lambda^{-j}
  double total = 0.0;
  double fact_n = 1.0;
  for (int j = 2; j <= n; ++j) fact_n *= j;
  for (int j = 0; j <= n && j <= x; ++j) {
    double b = 1.0;
    for (int r = 0; r < j; ++r) b = b * (x - r) / (r + 1);
    double e = (n - j) % 2 == 0 ? 1.0 : -1.0;
    for (int r = 2; r <= n - j; ++r) e /= r;
    total += b * std::pow(lambda, -j) * e;
  }
  return total * fact_n;
}

}  // namespace oracle
