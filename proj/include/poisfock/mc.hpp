#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"
#include "poisfock/parallel.hpp"
#include "poisfock/path.hpp"

namespace poisfock {

/// Sample mean with standard error = sample standard deviation / sqrt(n).
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Pairwise (tree) summation in a fixed order.
double pairwise_sum(std::span<const double> values);
McEstimate estimate(std::span<const double> values);

struct Draw {
  PathConfiguration path;
  /// marks[i] holds one Uniform[0,1] time mark per point at site i (marked batches only).
  std::vector<std::vector<double>> marks;
};

struct SampleBatch {
  std::uint64_t seed = 0;
  std::vector<double> intensity;
  bool marked = false;
  std::vector<Draw> draws;
};

/// n_samples independent configurations; draw d uses the RNG stream (seed, d).
SampleBatch sample_poisson(const FiniteIntensity& lambda, std::uint64_t seed, std::size_t n_samples,
                           bool marked = false, std::size_t workers = default_workers());

/// One line per draw: {"counts":[...]} or {"counts":[...],"marks":[[...],...]}.
void write_jsonl(const SampleBatch& batch, std::ostream& out);

/// Monte Carlo comparison of two estimators of the same quantity, evaluated on
/// the same draws. z uses the standard error of the per-draw differences.
struct IdentityCheck {
  McEstimate lhs;
  McEstimate rhs;
  McEstimate difference;
  double z = 0.0;
};

/// z-score of a mean against a known value (0 when the estimate is exact and agrees).
double z_score(double mean, double std_error, double target);

/// Mecke: E sum_{points y} h(eta, y) = sum_i lambda_i E h(eta + delta_i, i).
IdentityCheck mecke_check(const SiteFunctional& h, const FiniteIntensity& lambda, std::uint64_t seed,
                          std::size_t n_samples);

using TupleFunctional = std::function<double(std::span<const int>, std::span<const std::size_t>)>;

/// Multivariate Mecke: E sum over ordered m-tuples of distinct points of h(eta, y_1..y_m)
///   = sum_{y in Y^m} prod lambda_{y_j} E h(eta + delta_{y_1} + ... + delta_{y_m}, y).
IdentityCheck mecke_multivariate_check(const TupleFunctional& h, int m, const FiniteIntensity& lambda,
                                       std::uint64_t seed, std::size_t n_samples);

struct LaplaceCheck {
  McEstimate mc;
  double exact = 0.0;
  double z = 0.0;
};

/// exp[-sum_i lambda_i (1 - e^{-v_i})]
double laplace_exact(std::span<const double> v, const FiniteIntensity& lambda);
LaplaceCheck laplace_check(std::span<const double> v, const FiniteIntensity& lambda, std::uint64_t seed,
                           std::size_t n_samples);

/// Per-draw values of f, in draw order.
std::vector<double> evaluate(const SampleBatch& batch, const std::function<double(const Draw&)>& fn);

}  // namespace poisfock
