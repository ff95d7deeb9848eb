#include "poisfock/charlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "poisfock/errors.hpp"
#include "poisfock/lattice.hpp"

namespace poisfock {

namespace {

constexpr int kSumDegreeLimit = 30;
// Floating-point allowance on top of the truncation bound, relative to the
// envelope's full moment. Fixed so that the bound is monotone in the caps.
constexpr double kRelativeRoundoff = 1e-13;

void check_lambda(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("Charlier parameter lambda must be finite and positive");
  }
}

}  // namespace

double descending_factorial(double x, int j) {
  if (j < 0) throw DomainError("descending factorial order must be nonnegative");
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= (x - i);
  return r;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double factorial(int n) {
  if (n < 0) throw DomainError("factorial of a negative integer");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double charlier(int n, double lambda, double x) {
  check_lambda(lambda);
  if (n < 0) throw DomainError("Charlier degree must be nonnegative");
  if (n <= kSumDegreeLimit) {
    // extended precision absorbs most of the cancellation in the alternating sum
    long double sum = 0.0L;
    long double falling = 1.0L;  // (x)_j
    long double inv_pow = 1.0L;  // lambda^{-j}
    for (int j = 0; j <= n; ++j) {
      const long double term = binomial(n, j) * inv_pow * falling;
      sum += ((n - j) % 2 == 0) ? term : -term;
      falling *= (x - j);
      inv_pow /= lambda;
    }
    return static_cast<double>(sum);
  }
  // C_{m+1} = ((x - m - lambda) C_m - m C_{m-1}) / lambda
  double prev = 1.0;
  double cur = x / lambda - 1.0;
  for (int m = 1; m < n; ++m) {
    const double next = ((x - m - lambda) * cur - m * prev) / lambda;
    prev = cur;
    cur = next;
  }
  return cur;
}

double scaled_charlier(int n, double lambda, double x) {
  check_lambda(lambda);
  if (n < 0) throw DomainError("Charlier degree must be nonnegative");
  if (n > kSumDegreeLimit) return std::pow(lambda, n) * charlier(n, lambda, x);
  long double sum = 0.0L;
  long double falling = 1.0L;
  for (int j = 0; j <= n; ++j) {
    const long double term = binomial(n, j) * std::pow(static_cast<long double>(lambda), n - j) * falling;
    sum += ((n - j) % 2 == 0) ? term : -term;
    falling *= (x - j);
  }
  return static_cast<double>(sum);
}

double charlier_second_moment(int n, double lambda) {
  check_lambda(lambda);
  if (n < 0) throw DomainError("Charlier degree must be nonnegative");
  return std::exp(std::lgamma(n + 1.0) - n * std::log(lambda));
}

double poisson_pmf(double lambda, int n) {
  if (n < 0) return 0.0;
  return std::exp(n * std::log(lambda) - lambda - std::lgamma(n + 1.0));
}

double poisson_power_tail(double lambda, double power, int cap) {
  check_lambda(lambda);
  const double log_lambda = std::log(lambda);
  double sum = 0.0;
  for (int n = std::max(cap + 1, 0);; ++n) {
    const double term = std::exp(n * log_lambda - lambda - std::lgamma(n + 1.0) + power * std::log1p(n));
    sum += term;
    // ratio of consecutive terms beyond n, decreasing in n
    const double ratio = lambda / (n + 1.0) * std::pow((n + 2.0) / (n + 1.0), power);
    if (ratio <= 0.5 && (term == 0.0 || term <= 1e-18 * sum)) {
      return sum + term * ratio / (1.0 - ratio);
    }
    if (n > 10'000'000) throw Error("poisson tail series failed to converge");
  }
}

double poisson_tail(double lambda, int cap) { return poisson_power_tail(lambda, 0.0, cap); }

int poisson_cap(double lambda, double epsilon) {
  check_lambda(lambda);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("tail epsilon must lie in (0, 1)");
  // skip the bulk quickly, then walk to the minimal cap
  int cap = 0;
  if (lambda > 10.0) cap = static_cast<int>(std::floor(lambda));
  while (cap > 0 && poisson_tail(lambda, cap - 1) <= epsilon) --cap;
  while (poisson_tail(lambda, cap) > epsilon) ++cap;
  return cap;
}

void TruncationPolicy::validate() const {
  if (!(tail_epsilon > 0.0 && tail_epsilon < 1.0)) throw DomainError("tail_epsilon must lie in (0, 1)");
  if (cap_padding < 0) throw DomainError("cap_padding must be nonnegative");
  if (max_shells < 1) throw DomainError("max_shells must be positive");
}

std::vector<int> TruncationPolicy::caps_for(const FiniteIntensity& lambda) const {
  validate();
  const double per_site = tail_epsilon / static_cast<double>(lambda.sites());
  std::vector<int> caps(lambda.sites());
  for (std::size_t i = 0; i < caps.size(); ++i) caps[i] = poisson_cap(lambda[i], per_site) + cap_padding;
  return caps;
}

namespace {

struct BoxSum {
  double value = 0.0;
  std::size_t terms = 0;
};

std::vector<std::vector<double>> pmf_tables(const FiniteIntensity& lambda, const std::vector<int>& caps) {
  std::vector<std::vector<double>> t(caps.size());
  for (std::size_t i = 0; i < caps.size(); ++i) {
    t[i].resize(static_cast<std::size_t>(caps[i]) + 1);
    for (int n = 0; n <= caps[i]; ++n) t[i][n] = poisson_pmf(lambda[i], n);
  }
  return t;
}

double checked_eval(const Functional& f, std::span<const int> n) {
  const double v = f(n);
  if (!std::isfinite(v)) {
    throw EvaluationError("functional '" + f.label() + "' is not finite at " + format_counts(n));
  }
  return v;
}

// Sum over the box; when `shell_only` is set, only points with some n_i == caps_i.
BoxSum box_sum(const FiniteIntensity& lambda, const Functional& f, const std::vector<int>& caps,
               bool shell_only) {
  const auto pmf = pmf_tables(lambda, caps);
  CompensatedSum acc;
  std::size_t terms = 0;
  Box(caps).for_each([&](std::span<const int> n) {
    if (shell_only) {
      bool on_shell = false;
      for (std::size_t i = 0; i < n.size(); ++i) on_shell = on_shell || n[i] == caps[i];
      if (!on_shell) return;
    }
    double w = 1.0;
    for (std::size_t i = 0; i < n.size(); ++i) w *= pmf[i][n[i]];
    acc.add(checked_eval(f, n) * w);
    ++terms;
  });
  return {acc.value(), terms};
}

double envelope_error(const FiniteIntensity& lambda, const Envelope& env, const std::vector<int>& caps) {
  const std::size_t k = caps.size();
  std::vector<double> full(k), tail(k);
  for (std::size_t i = 0; i < k; ++i) {
    full[i] = poisson_power_tail(lambda[i], env.power, -1);
    tail[i] = poisson_power_tail(lambda[i], env.power, caps[i]);
  }
  double truncation = 0.0;
  double all = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    double t = tail[i];
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) t *= full[j];
    }
    truncation += t;
    all *= full[i];
  }
  return env.scale * (truncation + kRelativeRoundoff * all);
}

void check_arity(const FiniteIntensity& lambda, const Functional& f) {
  if (lambda.sites() != f.sites()) {
    throw DomainError("functional '" + f.label() + "' has " + std::to_string(f.sites()) +
                      " sites but the intensity has " + std::to_string(lambda.sites()));
  }
}

}  // namespace

ExpectationResult expectation_on_caps(const FiniteIntensity& lambda, const Functional& f,
                                      const std::vector<int>& caps) {
  check_arity(lambda, f);
  if (caps.size() != lambda.sites()) throw DomainError("caps have the wrong number of sites");
  const BoxSum s = box_sum(lambda, f, caps, false);
  ExpectationResult r;
  r.value = s.value;
  r.terms_evaluated = s.terms;
  r.caps = caps;
  if (f.envelope()) {
    r.error_bound = envelope_error(lambda, *f.envelope(), caps);
  } else {
    r.error_bound = std::numeric_limits<double>::infinity();
    r.heuristic = true;
  }
  return r;
}

ExpectationResult truncated_expectation(const FiniteIntensity& lambda, const Functional& f,
                                        const TruncationPolicy& policy) {
  check_arity(lambda, f);
  std::vector<int> caps = policy.caps_for(lambda);

  if (policy.mode == TruncationMode::DeclaredEnvelope) {
    if (!f.envelope()) {
      throw MissingEnvelopeError("functional '" + f.label() +
                                 "' has no growth envelope; declare one or use adaptive-shell mode");
    }
    return expectation_on_caps(lambda, f, caps);
  }

  BoxSum s = box_sum(lambda, f, caps, false);
  double value = s.value;
  std::size_t terms = s.terms;
  double last_shell = std::numeric_limits<double>::infinity();
  for (int step = 0; step < policy.max_shells; ++step) {
    for (int& c : caps) ++c;
    const BoxSum shell = box_sum(lambda, f, caps, true);
    value += shell.value;
    terms += shell.terms;
    last_shell = std::abs(shell.value);
    if (last_shell < policy.tail_epsilon * std::max(1.0, std::abs(value))) break;
  }
  ExpectationResult r;
  r.value = value;
  r.error_bound = last_shell;
  r.heuristic = true;
  r.terms_evaluated = terms;
  r.caps = caps;
  return r;
}

}  // namespace poisfock
