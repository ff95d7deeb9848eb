#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "poisfock/charlier.hpp"
#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"

namespace poisfock {

/// Order-n chaos index m = (m_1..m_k), |m| = n: how many of the n arguments sit at each site.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> m);
  MultiIndex(std::initializer_list<int> m);

  std::size_t sites() const noexcept { return m_.size(); }
  int order() const noexcept { return order_; }
  int operator[](std::size_t i) const { return m_.at(i); }
  std::span<const int> view() const noexcept { return m_; }
  const std::vector<int>& values() const noexcept { return m_; }

  MultiIndex plus(std::size_t site) const;

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

private:
  std::vector<int> m_;
  int order_ = 0;
};

/// Graded lexicographic order: lower order first; within an order, the index
/// with the larger leading entry first, i.e. (2,0) < (1,1) < (0,2).
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

/// All indices of the given order on k sites, in graded-lex order.
std::vector<MultiIndex> multi_indices_of_order(std::size_t sites, int order);
/// All indices with min_order <= |m| <= max_order, in graded-lex order.
std::vector<MultiIndex> multi_indices_up_to(std::size_t sites, int max_order, int min_order = 1);

/// n! / prod m_i!: the number of site tuples with profile m.
double multinomial(const MultiIndex& m);

/// prod_i lambda_i^{m_i} / m_i!, evaluated in log space.
double chaos_weight(const MultiIndex& m, const FiniteIntensity& lambda);

/// T_n f(y_1..y_n) = E D^n_{y_1..y_n} f(eta).
ExpectationResult t_n(const Functional& f, const FiniteIntensity& lambda,
                      std::span<const std::size_t> sites, const TruncationPolicy& policy = {});

struct ChaosTerm {
  MultiIndex index;
  double value = 0.0;   // a_m
  double error = 0.0;   // truncation bound on a_m
};

/// Chaos coefficients a_m = T_{|m|} f(y) for every profile 1 <= |m| <= n_max.
struct ChaosCoefficients {
  std::size_t sites = 0;
  int n_max = 0;
  double mean = 0.0;
  double mean_error = 0.0;
  std::vector<ChaosTerm> terms;  // graded-lex order
  double variance = 0.0;         // direct Var f(eta)
  double variance_error = 0.0;
  /// variance - sum_m a_m^2 prod lambda^m / m!
  double residual = 0.0;
  /// Numerical slack on the residual; residual >= -residual_tolerance always.
  double residual_tolerance = 0.0;
  bool heuristic = false;

  /// Null when the index is not stored (order 0 or above n_max).
  const ChaosTerm* find(const MultiIndex& m) const;
  /// a_m, with a_0 = mean. Throws DomainError above n_max.
  double coefficient(const MultiIndex& m) const;
};

/// a_m by the alternating binomial sum over shifted expectations
///   a_m = sum_{i <= m} (-1)^{|m|-|i|} prod_j binom(m_j, i_j) E f(eta + i).
ChaosCoefficients chaos_coefficients(const Functional& f, const FiniteIntensity& lambda, int n_max,
                                     const TruncationPolicy& policy = {});

/// a_m recovered by orthogonality: E[f(eta) prod_i C_{m_i}(lambda_i; eta_i)].
ExpectationResult coefficient_by_orthogonality(const Functional& f, const FiniteIntensity& lambda,
                                               const MultiIndex& m, const TruncationPolicy& policy = {});

/// mu -> prod_i C_{m_i}(lambda_i; mu_i), with its envelope.
Functional charlier_product(const FiniteIntensity& lambda, const MultiIndex& m);

struct FockCovariance {
  double total = 0.0;
  /// per_order[n-1] = sum_{|m| = n} a_m(f) a_m(g) prod lambda^m / m!
  std::vector<double> per_order;
  double error = 0.0;
};

/// Sum over orders 1..n_max of (1/n!) <T_n f, T_n g>_n.
FockCovariance fock_covariance(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                               int n_max, const TruncationPolicy& policy = {});
FockCovariance fock_covariance(const ChaosCoefficients& f, const ChaosCoefficients& g,
                               const FiniteIntensity& lambda);

/// mean + sum_m a_m prod_i lambda_i^{m_i} C_{m_i}(lambda_i; n_i) / m_i!
double reconstruct(const ChaosCoefficients& coeffs, const FiniteIntensity& lambda, std::span<const int> at);

/// Var f(eta), computed as E[(f - Ef)^2] by truncated enumeration.
ExpectationResult direct_variance(const Functional& f, const FiniteIntensity& lambda,
                                  const TruncationPolicy& policy = {});
/// Cov(f(eta), g(eta)), computed as E[(f - Ef)(g - Eg)].
ExpectationResult direct_covariance(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                                    const TruncationPolicy& policy = {});

}  // namespace poisfock
