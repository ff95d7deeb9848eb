#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "poisfock/charlier.hpp"
#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"

namespace poisfock {

/// Quadrature over the time marks s in [0, 1] plus the truncation policy shared by
/// the before-s and after-s Poisson enumerations.
struct TimeMarkedKernel {
  std::vector<double> nodes;
  std::vector<double> weights;
  TruncationPolicy policy;

  /// Gauss-Legendre nodes on [0, 1].
  static TimeMarkedKernel gauss_legendre(int nodes = 16, TruncationPolicy policy = {});
  void validate() const;
};

/// E_{zeta ~ Poisson((1-s) lambda)} [D_y f(before + zeta)], for 0 < s < 1.
ExpectationResult conditional_difference_mean(const Functional& f, const FiniteIntensity& lambda, std::size_t y,
                                              double s, const Counts& before, const TruncationPolicy& policy = {});

struct CovarianceTerm {
  std::size_t node = 0;
  double s = 0.0;
  double weight = 0.0;
  std::size_t site = 0;
  /// E_{n_s ~ Poisson(s lambda)} [h_f(s, n_s, y) h_g(s, n_s, y)]
  double integrand = 0.0;
  /// lambda_y * weight * integrand
  double contribution = 0.0;
};

struct CovarianceIdentity {
  double value = 0.0;
  /// Estimate of the truncation error (dropped Poisson mass times the largest retained integrand).
  double error_estimate = 0.0;
  std::vector<double> per_site;
  /// Ordered by node, then site.
  std::vector<CovarianceTerm> terms;
  std::vector<int> caps;
};

/// sum_y lambda_y int_0^1 E[h_f(s, eta_s, y) h_g(s, eta_s, y)] ds with eta_s ~ Poisson(s lambda).
/// Both enumerations use the caps of the full intensity, which dominate those of s lambda and (1-s) lambda.
CovarianceIdentity covariance_identity(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                                       const TimeMarkedKernel& kernel = TimeMarkedKernel::gauss_legendre());

/// node,s,weight,site,integrand,contribution with 17 significant digits; sites are 1-based.
void write_breakdown_csv(const CovarianceIdentity& result, std::ostream& out);

struct FkgResult {
  double covariance = 0.0;
  double error_bound = 0.0;
  bool certified_nonnegative = false;
  /// The common partition: increasing[i] for sites in B.
  std::vector<bool> increasing;
};

/// Throws PartitionMismatch unless f and g declare the same monotone partition, and
/// MonotonicityViolation (with the offending lattice point) if either breaks it on the lattice.
FkgResult fkg_check(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                    const TruncationPolicy& policy = {}, double tolerance = 1e-10);

/// Throws MonotonicityViolation if f breaks its declared partition somewhere on the box.
void verify_monotone(const Functional& f, const MonotoneSites& partition, const std::vector<int>& caps);

}  // namespace poisfock
