#include "poisfock/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "poisfock/chaos.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/lattice.hpp"

namespace poisfock {

namespace {

constexpr double kVanishingRelative = 1e-10;

struct SignedSum {
  double value = 0.0;
  double error = 0.0;
};

}  // namespace

ExpectationResult expected_sq_difference_norm(const Functional& f, const FiniteIntensity& lambda, int n,
                                              const TruncationPolicy& policy) {
  if (n < 1) throw DomainError("difference order must be at least 1");
  ExpectationResult out;
  CompensatedSum sum;
  for (const MultiIndex& m : multi_indices_of_order(lambda.sites(), n)) {
    const std::vector<std::size_t> ys = sites_of(m.view());
    const Functional d = iterated_difference(f, ys);
    const ExpectationResult e = truncated_expectation(lambda, product(d, d), policy);
    // n!/prod m_i! tuples share this profile, each weighted prod lambda_{y_i}
    const double weight = factorial(n) * chaos_weight(m, lambda);
    sum.add(weight * e.value);
    out.error_bound += weight * e.error_bound;
    out.heuristic = out.heuristic || e.heuristic;
    out.terms_evaluated += e.terms_evaluated;
    out.caps = e.caps;
  }
  out.value = sum.value();
  return out;
}

VanishingCheck differences_vanish(const Functional& f, const FiniteIntensity& lambda, int order,
                                  const TruncationPolicy& policy) {
  if (order < 0) throw DomainError("difference order must be nonnegative");
  VanishingCheck out;
  out.caps = policy.caps_for(lambda);
  const Box box(out.caps);
  double scale = 0.0;
  box.for_each([&](std::span<const int> n) { scale = std::max(scale, std::abs(f(n))); });
  out.threshold = kVanishingRelative * scale;

  const auto profiles = multi_indices_of_order(lambda.sites(), order);
  for (const MultiIndex& m : profiles) {
    const std::vector<std::size_t> ys = sites_of(m.view());
    bool ok = true;
    box.for_each([&](std::span<const int> n) {
      if (ok && std::abs(iterated_difference_at(f, ys, n)) > out.threshold) ok = false;
    });
    if (!ok) return out;
  }
  out.vanishes = true;
  return out;
}

std::optional<int> finite_chaos_order(const Functional& f, const FiniteIntensity& lambda, int k_max,
                                      const TruncationPolicy& policy) {
  if (k_max < 0) throw DomainError("k_max must be nonnegative");
  for (int k = 0; k <= k_max; ++k) {
    if (differences_vanish(f, lambda, k + 1, policy).vanishes) return k;
  }
  return std::nullopt;
}

VarianceBracket alternating_bracket(const Functional& f, const FiniteIntensity& lambda, int k,
                                    const TruncationPolicy& policy) {
  if (k < 1) throw DomainError("bracket order k must be at least 1");
  VarianceBracket b;
  b.order = k;
  SignedSum lower, upper;
  for (int n = 1; n <= 2 * k; ++n) {
    const ExpectationResult norm = expected_sq_difference_norm(f, lambda, n, policy);
    const double term = norm.value / factorial(n);
    const double err = norm.error_bound / factorial(n);
    const double signed_term = (n % 2 == 1) ? term : -term;
    lower.value += signed_term;
    lower.error += err;
    if (n <= 2 * k - 1) {
      upper.value += signed_term;
      upper.error += err;
    }
  }
  const ExpectationResult var = direct_variance(f, lambda, policy);
  b.lower = lower.value;
  b.upper = upper.value;
  b.variance = var.value;
  b.tolerance = lower.error + var.error_bound + 1e-12 * std::max(1.0, std::abs(var.value));

  const VanishingCheck lower_check = differences_vanish(f, lambda, 2 * k + 1, policy);
  const VanishingCheck upper_check = differences_vanish(f, lambda, 2 * k, policy);
  b.lower_tight = lower_check.vanishes;
  b.upper_tight = upper_check.vanishes;
  b.vanishing_threshold = lower_check.threshold;
  b.lattice_caps = lower_check.caps;
  return b;
}

VarianceBracket truncated_bounds(const Functional& f, const FiniteIntensity& lambda, int k,
                                 const TruncationPolicy& policy) {
  if (k < 1) throw DomainError("bound order k must be at least 1");
  VarianceBracket b;
  b.order = k;
  const ChaosCoefficients coeffs = chaos_coefficients(f, lambda, k, policy);

  SignedSum head;  // orders 1..k-1
  SignedSum top;   // order k
  for (const ChaosTerm& t : coeffs.terms) {
    const double w = chaos_weight(t.index, lambda);
    SignedSum& target = t.index.order() < k ? head : top;
    target.value += t.value * t.value * w;
    target.error += w * (2.0 * std::abs(t.value) * t.error + t.error * t.error);
  }
  const ExpectationResult norm = expected_sq_difference_norm(f, lambda, k, policy);

  b.lower = head.value + top.value;
  b.upper = head.value + norm.value / factorial(k);
  b.variance = coeffs.variance;
  b.tolerance = head.error + top.error + norm.error_bound / factorial(k) + coeffs.variance_error +
                1e-12 * std::max(1.0, std::abs(coeffs.variance));

  const VanishingCheck check = differences_vanish(f, lambda, k + 1, policy);
  b.lower_tight = check.vanishes;
  b.upper_tight = check.vanishes;
  b.vanishing_threshold = check.threshold;
  b.lattice_caps = check.caps;
  return b;
}

}  // namespace poisfock
