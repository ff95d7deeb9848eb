#pragma once

#include <optional>
#include <vector>

#include "poisfock/charlier.hpp"
#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"

namespace poisfock {

/// Variance sandwiched between two partial sums, with equality diagnostics.
struct VarianceBracket {
  int order = 1;
  double lower = 0.0;
  double upper = 0.0;
  double variance = 0.0;
  /// Combined truncation error of lower, upper and variance.
  double tolerance = 0.0;
  bool lower_tight = false;
  bool upper_tight = false;
  /// "Vanishes identically" means |D^j f| <= vanishing_threshold on the lattice with these caps.
  double vanishing_threshold = 0.0;
  std::vector<int> lattice_caps;

  bool ordered() const noexcept { return lower <= variance + tolerance && variance <= upper + tolerance; }
};

/// E ||D^n f(eta)||_n^2 = sum over site tuples of E[(D^n f)^2] prod lambda_{y_i},
/// reduced to a multinomial-weighted sum over profiles.
ExpectationResult expected_sq_difference_norm(const Functional& f, const FiniteIntensity& lambda, int n,
                                              const TruncationPolicy& policy = {});

/// lower = sum_{n=1}^{2k} (-1)^{n+1}/n! E||D^n f||^2, upper = the same sum to 2k-1.
/// lower_tight iff D^{2k+1} f vanishes on the lattice, upper_tight iff D^{2k} f does.
VarianceBracket alternating_bracket(const Functional& f, const FiniteIntensity& lambda, int k,
                                    const TruncationPolicy& policy = {});

/// lower = sum_{n<=k} ||T_n f||^2 / n!, upper = sum_{n<k} ||T_n f||^2 / n! + E||D^k f||^2 / k!.
/// Both flags are set iff D^{k+1} f vanishes on the lattice.
VarianceBracket truncated_bounds(const Functional& f, const FiniteIntensity& lambda, int k,
                                 const TruncationPolicy& policy = {});

struct VanishingCheck {
  bool vanishes = false;
  double threshold = 0.0;
  std::vector<int> caps;
};

/// Whether every order-`order` iterated difference of f is below 1e-10 * max|f|
/// at every point of the truncation lattice.
VanishingCheck differences_vanish(const Functional& f, const FiniteIntensity& lambda, int order,
                                  const TruncationPolicy& policy = {});

/// Least k <= k_max with vanishing (k+1)-th differences, if any.
std::optional<int> finite_chaos_order(const Functional& f, const FiniteIntensity& lambda, int k_max,
                                      const TruncationPolicy& policy = {});

}  // namespace poisfock
