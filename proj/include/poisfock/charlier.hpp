#pragma once

#include <cstddef>
#include <vector>

#include "poisfock/functional.hpp"
#include "poisfock/intensity.hpp"

namespace poisfock {

/// (x)_j = x (x-1) ... (x-j+1), with (x)_0 = 1.
double descending_factorial(double x, int j);

/// Charlier polynomial C_n(lambda; x) = sum_j binom(n,j) (-1)^{n-j} lambda^{-j} (x)_j.
/// The defining sum is used up to degree 30 and the three-term recurrence above.
double charlier(int n, double lambda, double x);

/// lambda^n C_n(lambda; x) = sum_j binom(n,j) (-lambda)^{n-j} (x)_j. Integer-exact
/// when lambda and x are small integers.
double scaled_charlier(int n, double lambda, double x);

/// E[C_n(lambda; X)^2] = n! lambda^{-n} for X ~ Poisson(lambda).
double charlier_second_moment(int n, double lambda);

double binomial(int n, int k);
double factorial(int n);

/// Poisson(lambda) probability mass at n, via log-gamma.
double poisson_pmf(double lambda, int n);

/// E[(1 + X)^power ; X > cap] for X ~ Poisson(lambda). cap = -1 gives the full moment.
/// Upper bound: the series is summed until the term ratio is below 1/2 and the
/// remainder is bounded geometrically.
double poisson_power_tail(double lambda, double power, int cap);

/// P(X > cap).
double poisson_tail(double lambda, int cap);

/// Minimal cap with P(X > cap) <= epsilon.
int poisson_cap(double lambda, double epsilon);

enum class TruncationMode { DeclaredEnvelope, AdaptiveShell };

/// How an expectation over independent Poisson counts is truncated.
///
/// Per-site caps are the minimal N_i with P(Poisson(lambda_i) > N_i) <= tail_epsilon / k,
/// raised by `cap_padding`. In adaptive-shell mode the caps keep growing by one
/// until the newest shell contributes less than tail_epsilon * max(1, |value|).
struct TruncationPolicy {
  double tail_epsilon = 1e-16;
  TruncationMode mode = TruncationMode::DeclaredEnvelope;
  int cap_padding = 0;
  int max_shells = 500;

  std::vector<int> caps_for(const FiniteIntensity& lambda) const;
  void validate() const;
};

struct ExpectationResult {
  double value = 0.0;
  /// Rigorous bound on |value - E f| in declared-envelope mode; the size of the
  /// last shell (an estimate, not a bound) when `heuristic` is set.
  double error_bound = 0.0;
  bool heuristic = false;
  std::size_t terms_evaluated = 0;
  std::vector<int> caps;
};

/// E f(eta) for eta with independent Poisson(lambda_i) coordinates.
///
/// Throws MissingEnvelopeError in declared-envelope mode when f has no envelope,
/// and EvaluationError when f is not finite somewhere on the lattice.
ExpectationResult truncated_expectation(const FiniteIntensity& lambda, const Functional& f,
                                        const TruncationPolicy& policy = {});

/// Same, on explicitly given caps (declared-envelope bound only).
ExpectationResult expectation_on_caps(const FiniteIntensity& lambda, const Functional& f,
                                      const std::vector<int>& caps);

}  // namespace poisfock
