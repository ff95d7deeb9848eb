#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "poisfock/chaos.hpp"
#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"
#include "poisfock/mc.hpp"
#include "poisfock/path.hpp"

namespace poisfock {

/// A function on Y^n stored densely, argument 0 varying fastest.
class SiteFunction {
public:
  SiteFunction(std::size_t sites, int order);
  SiteFunction(std::size_t sites, int order, std::vector<double> values);

  std::size_t sites() const noexcept { return sites_; }
  int order() const noexcept { return order_; }
  const std::vector<double>& values() const noexcept { return values_; }

  double operator()(std::span<const std::size_t> y) const { return values_[index_of(y)]; }
  double& at(std::span<const std::size_t> y) { return values_[index_of(y)]; }

  /// Visits every argument tuple in storage order.
  void for_each_tuple(const std::function<void(std::span<const std::size_t>)>& fn) const;

  std::size_t index_of(std::span<const std::size_t> y) const;

private:
  std::size_t sites_;
  int order_;
  std::vector<double> values_;
};

/// (1/n!) sum over permutations of the arguments.
SiteFunction symmetrize(const SiteFunction& g);

/// <g, h>_n = sum_{y in Y^n} g(y) h(y) prod_j lambda_{y_j}.
double inner_product(const SiteFunction& g, const SiteFunction& h, const FiniteIntensity& lambda);

struct SumProductTerm {
  double coefficient = 1.0;
  /// factors[j][y] = g_j(y); one weight vector per argument.
  std::vector<std::vector<double>> factors;
};

/// Finite linear combination of tensor products g_1 (x) ... (x) g_n.
class SumProductFunction {
public:
  SumProductFunction(std::size_t sites, int order, std::vector<SumProductTerm> terms);

  /// 1_{B_1}^{(x) m_1} (x) ... (x) 1_{B_p}^{(x) m_p}
  static SumProductFunction block_tensor(std::size_t sites, const std::vector<std::vector<std::size_t>>& blocks,
                                         const std::vector<int>& multiplicities);

  std::size_t sites() const noexcept { return sites_; }
  int order() const noexcept { return order_; }
  const std::vector<SumProductTerm>& terms() const noexcept { return terms_; }

  double operator()(std::span<const std::size_t> y) const;
  SiteFunction to_site_function() const;

private:
  std::size_t sites_;
  int order_;
  std::vector<SumProductTerm> terms_;
};

using TupleWeight = std::function<double(std::span<const std::size_t>)>;

/// mu^{(m)}(h): sum over ordered m-tuples of distinct points of mu of h at their
/// sites, computed per site tuple with falling-factorial multiplicities.
double factorial_moment(const PathConfiguration& mu, int m, const TupleWeight& h);

/// mu^{(m)}(g_1 (x) ... (x) g_m) for per-argument weight vectors.
double factorial_moment(const PathConfiguration& mu, std::span<const std::vector<double>> factors);

/// I_n(g)(mu) = sum_terms c sum_{J subset [n]} (-1)^{n-|J|} mu^{(|J|)}(g_J) prod_{j not in J} lambda(g_j).
double wiener_ito_pathwise(const SumProductFunction& g, const PathConfiguration& mu, const FiniteIntensity& lambda);

/// I_n(h)(mu) = sum_{y in Y^n} h(y) prod_i lambda_i^{m_i} C_{m_i}(lambda_i; mu_i), m = profile of y.
double wiener_ito_charlier(const SiteFunction& h, const PathConfiguration& mu, const FiniteIntensity& lambda);

struct IsometryCheck {
  McEstimate estimate;
  double exact = 0.0;
  double z = 0.0;
};

/// E[I_m(g) I_n(h)] by sampling against 1{m = n} m! <g~, h~>_m.
IsometryCheck isometry_check(const SumProductFunction& g, const SumProductFunction& h,
                             const FiniteIntensity& lambda, std::uint64_t seed, std::size_t n_samples);

struct TruncatedValue {
  double value = 0.0;
  /// Set when the top stored order has a non-vanishing coefficient, so that
  /// omitted higher orders may contribute.
  bool truncated = false;
};

/// Whether some coefficient of order n_max is distinguishable from zero.
bool top_order_active(const ChaosCoefficients& coeffs);

/// D'_y f(mu) = sum_{|m'| < n_max} a_{m' + e_y} prod_i lambda_i^{m'_i} C_{m'_i}(lambda_i; mu_i) / m'_i!.
TruncatedValue derivative_operator(const ChaosCoefficients& coeffs, const FiniteIntensity& lambda,
                                   const PathConfiguration& mu, std::size_t y);

/// delta'(h)(mu) = sum_i mu_i h(mu - e_i, i) - sum_i lambda_i h(mu, i).
double skorohod_pathwise(const SiteFunctional& h, const PathConfiguration& mu, const FiniteIntensity& lambda);

/// Envelope of mu -> delta'(h)(mu) derived from the envelope of h.
Envelope skorohod_pathwise_envelope(const Envelope& h, const FiniteIntensity& lambda);

/// Chaos coefficients of every y-section of h, up to order n_max.
struct SkorohodKernel {
  std::vector<ChaosCoefficients> sections;
  int n_max = 0;
  bool truncated = false;
};

SkorohodKernel skorohod_kernel(const SiteFunctional& h, const FiniteIntensity& lambda, int n_max,
                               const TruncationPolicy& policy = {});

/// delta(h)(mu) = sum_n I_{n+1}(h~_n)(mu), expanded as
///   sum_y sum_{|m'| <= n_max} a^{(y)}_{m'} / m'! prod_i lambda_i^{M_i} C_{M_i}(lambda_i; mu_i),  M = m' + e_y.
TruncatedValue skorohod_chaos(const SkorohodKernel& kernel, const FiniteIntensity& lambda,
                              const PathConfiguration& mu);

/// mu -> delta(h)(mu) as a functional with an envelope.
Functional skorohod_functional(const SkorohodKernel& kernel, const FiniteIntensity& lambda);

struct DualityCheck {
  /// E sum_y lambda_y D_y f(eta) h(eta, y)
  ExpectationResult lhs;
  /// E f(eta) delta(h)(eta)
  ExpectationResult rhs_chaos;
  /// E f(eta) delta'(h)(eta)
  ExpectationResult rhs_pathwise;
  bool truncated = false;

  /// Both right sides agree with the left within the summed error bounds plus `slack`.
  bool agrees(double slack) const;
};

DualityCheck duality_check(const Functional& f, const SiteFunctional& h, const FiniteIntensity& lambda, int n_max,
                           const TruncationPolicy& policy = {});

}  // namespace poisfock
