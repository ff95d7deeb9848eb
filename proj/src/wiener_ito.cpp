#include "poisfock/wiener_ito.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poisfock/errors.hpp"
#include "poisfock/lattice.hpp"

namespace poisfock {

namespace {

std::size_t checked_size(std::size_t sites, int order) {
  if (sites == 0) throw DomainError("site functions need at least one site");
  if (order < 0) throw DomainError("order must be nonnegative");
  std::size_t size = 1;
  for (int j = 0; j < order; ++j) size *= sites;
  return size;
}

std::vector<int> profile_of(std::span<const std::size_t> y, std::size_t sites) {
  std::vector<int> m(sites, 0);
  for (std::size_t s : y) ++m[s];
  return m;
}

// prod_i lambda_i^{M_i} C_{M_i}(lambda_i; mu_i)
double charlier_monomial(std::span<const int> profile, const FiniteIntensity& lambda, std::span<const int> mu) {
  double v = 1.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (profile[i] > 0) v *= scaled_charlier(profile[i], lambda[i], mu[i]);
  }
  return v;
}

double factorial_of_profile(std::span<const int> m) {
  double v = 1.0;
  for (int x : m) v *= factorial(x);
  return v;
}

}  // namespace

SiteFunction::SiteFunction(std::size_t sites, int order)
    : sites_(sites), order_(order), values_(checked_size(sites, order), 0.0) {}

SiteFunction::SiteFunction(std::size_t sites, int order, std::vector<double> values)
    : sites_(sites), order_(order), values_(std::move(values)) {
  if (values_.size() != checked_size(sites, order)) throw DomainError("site function table has the wrong size");
}

std::size_t SiteFunction::index_of(std::span<const std::size_t> y) const {
  if (y.size() != static_cast<std::size_t>(order_)) throw DomainError("argument tuple has the wrong length");
  std::size_t idx = 0;
  for (std::size_t j = y.size(); j-- > 0;) {
    if (y[j] >= sites_) throw DomainError("argument site out of range");
    idx = idx * sites_ + y[j];
  }
  return idx;
}

void SiteFunction::for_each_tuple(const std::function<void(std::span<const std::size_t>)>& fn) const {
  std::vector<std::size_t> y(static_cast<std::size_t>(order_), 0);
  for (std::size_t visited = 0; visited < values_.size(); ++visited) {
    fn(y);
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (++y[j] < sites_) break;
      y[j] = 0;
    }
  }
}

SiteFunction symmetrize(const SiteFunction& g) {
  SiteFunction out(g.sites(), g.order());
  std::vector<std::size_t> perm(static_cast<std::size_t>(g.order()));
  std::vector<std::size_t> permuted(perm.size());
  const double count = factorial(g.order());
  g.for_each_tuple([&](std::span<const std::size_t> y) {
    std::iota(perm.begin(), perm.end(), 0);
    double sum = 0.0;
    do {
      for (std::size_t j = 0; j < perm.size(); ++j) permuted[j] = y[perm[j]];
      sum += g(permuted);
    } while (std::next_permutation(perm.begin(), perm.end()));
    out.at(y) = sum / count;
  });
  return out;
}

double inner_product(const SiteFunction& g, const SiteFunction& h, const FiniteIntensity& lambda) {
  if (g.sites() != h.sites() || g.order() != h.order() || g.sites() != lambda.sites()) {
    throw DomainError("inner product of incompatible site functions");
  }
  CompensatedSum sum;
  g.for_each_tuple([&](std::span<const std::size_t> y) {
    double w = g(y) * h(y);
    for (std::size_t s : y) w *= lambda[s];
    sum.add(w);
  });
  return sum.value();
}

SumProductFunction::SumProductFunction(std::size_t sites, int order, std::vector<SumProductTerm> terms)
    : sites_(sites), order_(order), terms_(std::move(terms)) {
  if (sites == 0) throw DomainError("sum-product functions need at least one site");
  if (order < 1) throw DomainError("sum-product order must be at least 1");
  for (const auto& t : terms_) {
    if (t.factors.size() != static_cast<std::size_t>(order)) throw DomainError("term has the wrong number of factors");
    for (const auto& g : t.factors) {
      if (g.size() != sites) throw DomainError("factor has the wrong number of sites");
      for (double v : g) {
        if (!std::isfinite(v)) throw DomainError("factor values must be finite");
      }
    }
  }
}

SumProductFunction SumProductFunction::block_tensor(std::size_t sites,
                                                    const std::vector<std::vector<std::size_t>>& blocks,
                                                    const std::vector<int>& multiplicities) {
  if (blocks.size() != multiplicities.size()) throw DomainError("one multiplicity per block is required");
  SumProductTerm term;
  std::vector<bool> used(sites, false);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    std::vector<double> indicator(sites, 0.0);
    for (std::size_t y : blocks[b]) {
      if (y >= sites) throw DomainError("block site out of range");
      if (used[y]) throw DomainError("blocks must be disjoint");
      used[y] = true;
      indicator[y] = 1.0;
    }
    if (multiplicities[b] < 0) throw DomainError("multiplicities must be nonnegative");
    for (int r = 0; r < multiplicities[b]; ++r) term.factors.push_back(indicator);
  }
  const int order = static_cast<int>(term.factors.size());
  return SumProductFunction(sites, order, {std::move(term)});
}

double SumProductFunction::operator()(std::span<const std::size_t> y) const {
  if (y.size() != static_cast<std::size_t>(order_)) throw DomainError("argument tuple has the wrong length");
  double sum = 0.0;
  for (const auto& t : terms_) {
    double v = t.coefficient;
    for (std::size_t j = 0; j < y.size(); ++j) v *= t.factors[j].at(y[j]);
    sum += v;
  }
  return sum;
}

SiteFunction SumProductFunction::to_site_function() const {
  SiteFunction out(sites_, order_);
  out.for_each_tuple([&](std::span<const std::size_t> y) { out.at(y) = (*this)(y); });
  return out;
}

namespace {

// Sum over site tuples y with at least as many points as needed at each site;
// `weight` is the running product of falling-factorial multiplicities.
template <class Leaf, class Step>
void for_each_point_tuple(std::vector<int>& remaining, std::vector<std::size_t>& y, std::size_t pos, double weight,
                          const Leaf& leaf, const Step& step) {
  if (pos == y.size()) {
    leaf(std::span<const std::size_t>(y), weight);
    return;
  }
  for (std::size_t i = 0; i < remaining.size(); ++i) {
    if (remaining[i] == 0) continue;
    const double w = step(pos, i);
    if (w == 0.0) continue;
    y[pos] = i;
    const double ways = remaining[i]--;
    for_each_point_tuple(remaining, y, pos + 1, weight * ways * w, leaf, step);
    ++remaining[i];
  }
}

}  // namespace

double factorial_moment(const PathConfiguration& mu, int m, const TupleWeight& h) {
  if (m < 1) throw DomainError("factorial moment order must be at least 1");
  std::vector<int> remaining(mu.counts().occupations());
  std::vector<std::size_t> y(static_cast<std::size_t>(m));
  double sum = 0.0;
  for_each_point_tuple(
      remaining, y, 0, 1.0,
      [&](std::span<const std::size_t> t, double weight) { sum += weight * h(t); },
      [](std::size_t, std::size_t) { return 1.0; });
  return sum;
}

double factorial_moment(const PathConfiguration& mu, std::span<const std::vector<double>> factors) {
  if (factors.empty()) return 1.0;
  std::vector<int> remaining(mu.counts().occupations());
  std::vector<std::size_t> y(factors.size());
  double sum = 0.0;
  for_each_point_tuple(
      remaining, y, 0, 1.0, [&](std::span<const std::size_t>, double weight) { sum += weight; },
      [&](std::size_t pos, std::size_t i) { return factors[pos].at(i); });
  return sum;
}

double wiener_ito_pathwise(const SumProductFunction& g, const PathConfiguration& mu, const FiniteIntensity& lambda) {
  if (g.sites() != mu.sites() || g.sites() != lambda.sites()) throw DomainError("integrand, path and intensity disagree on k");
  const auto n = static_cast<std::size_t>(g.order());
  double total = 0.0;
  for (const auto& term : g.terms()) {
    std::vector<double> mass(n);
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t y = 0; y < g.sites(); ++y) s += lambda[y] * term.factors[j][y];
      mass[j] = s;
    }
    double term_sum = 0.0;
    std::vector<std::vector<double>> chosen;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
      chosen.clear();
      double compensator = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (mask >> j & 1U) {
          chosen.push_back(term.factors[j]);
        } else {
          compensator *= mass[j];
        }
      }
      const double sign = (n - chosen.size()) % 2 == 0 ? 1.0 : -1.0;
      term_sum += sign * factorial_moment(mu, chosen) * compensator;
    }
    total += term.coefficient * term_sum;
  }
  return total;
}

double wiener_ito_charlier(const SiteFunction& h, const PathConfiguration& mu, const FiniteIntensity& lambda) {
  if (h.sites() != mu.sites() || h.sites() != lambda.sites()) throw DomainError("integrand, path and intensity disagree on k");
  const auto counts = mu.counts().view();
  double sum = 0.0;
  h.for_each_tuple([&](std::span<const std::size_t> y) {
    const double v = h(y);
    if (v == 0.0) return;
    sum += v * charlier_monomial(profile_of(y, h.sites()), lambda, counts);
  });
  return sum;
}

IsometryCheck isometry_check(const SumProductFunction& g, const SumProductFunction& h,
                             const FiniteIntensity& lambda, std::uint64_t seed, std::size_t n_samples) {
  IsometryCheck out;
  if (g.order() == h.order()) {
    out.exact = factorial(g.order()) *
                inner_product(symmetrize(g.to_site_function()), symmetrize(h.to_site_function()), lambda);
  }
  const SampleBatch batch = sample_poisson(lambda, seed, n_samples);
  const auto values = evaluate(batch, [&](const Draw& d) {
    return wiener_ito_pathwise(g, d.path, lambda) * wiener_ito_pathwise(h, d.path, lambda);
  });
  out.estimate = estimate(values);
  out.z = z_score(out.estimate.mean, out.estimate.std_error, out.exact);
  return out;
}

bool top_order_active(const ChaosCoefficients& coeffs) {
  double scale = std::abs(coeffs.mean);
  for (const auto& t : coeffs.terms) scale = std::max(scale, std::abs(t.value));
  const double floor = 1e-9 * std::max(1.0, scale);
  for (const auto& t : coeffs.terms) {
    if (t.index.order() == coeffs.n_max && std::abs(t.value) > std::max(floor, 2.0 * t.error)) return true;
  }
  return false;
}

TruncatedValue derivative_operator(const ChaosCoefficients& coeffs, const FiniteIntensity& lambda,
                                   const PathConfiguration& mu, std::size_t y) {
  if (coeffs.sites != lambda.sites() || mu.sites() != lambda.sites()) throw DomainError("coefficients, path and intensity disagree on k");
  if (y >= lambda.sites()) throw DomainError("site out of range");
  TruncatedValue out;
  out.truncated = top_order_active(coeffs);
  if (coeffs.n_max < 1) return out;
  const auto counts = mu.counts().view();
  CompensatedSum sum;
  for (const MultiIndex& m : multi_indices_up_to(lambda.sites(), coeffs.n_max - 1, 0)) {
    const double a = coeffs.coefficient(m.plus(y));
    if (a == 0.0) continue;
    sum.add(a * charlier_monomial(m.view(), lambda, counts) / factorial_of_profile(m.view()));
  }
  out.value = sum.value();
  return out;
}

double skorohod_pathwise(const SiteFunctional& h, const PathConfiguration& mu, const FiniteIntensity& lambda) {
  if (h.sites() != mu.sites() || h.sites() != lambda.sites()) throw DomainError("integrand, path and intensity disagree on k");
  std::vector<int> n(mu.counts().occupations());
  double s = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (n[i] == 0) continue;
    const int c = n[i]--;
    s += c * h(n, i);
    ++n[i];
  }
  for (std::size_t i = 0; i < n.size(); ++i) s -= lambda[i] * h(n, i);
  return s;
}

Envelope skorohod_pathwise_envelope(const Envelope& h, const FiniteIntensity& lambda) {
  // sum_i n_i <= prod_i (1 + n_i)
  return {h.scale * (1.0 + lambda.total()), h.power + 1.0};
}

SkorohodKernel skorohod_kernel(const SiteFunctional& h, const FiniteIntensity& lambda, int n_max,
                               const TruncationPolicy& policy) {
  if (h.sites() != lambda.sites()) throw DomainError("integrand and intensity disagree on k");
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  SkorohodKernel out;
  out.n_max = n_max;
  for (std::size_t y = 0; y < lambda.sites(); ++y) {
    out.sections.push_back(chaos_coefficients(h.section(y), lambda, n_max, policy));
    out.truncated = out.truncated || top_order_active(out.sections.back());
  }
  return out;
}

namespace {

struct SkorohodTerm {
  std::vector<int> profile;  // M = m' + e_y
  double coefficient = 0.0;  // a^{(y)}_{m'} / m'!
};

std::vector<SkorohodTerm> skorohod_terms(const SkorohodKernel& kernel, std::size_t k) {
  std::vector<SkorohodTerm> terms;
  for (std::size_t y = 0; y < kernel.sections.size(); ++y) {
    for (const MultiIndex& m : multi_indices_up_to(k, kernel.n_max, 0)) {
      const double a = kernel.sections[y].coefficient(m);
      if (a == 0.0) continue;
      terms.push_back({m.plus(y).values(), a / factorial_of_profile(m.view())});
    }
  }
  return terms;
}

}  // namespace

TruncatedValue skorohod_chaos(const SkorohodKernel& kernel, const FiniteIntensity& lambda,
                              const PathConfiguration& mu) {
  if (kernel.sections.size() != lambda.sites() || mu.sites() != lambda.sites()) {
    throw DomainError("kernel, path and intensity disagree on k");
  }
  TruncatedValue out;
  out.truncated = kernel.truncated;
  CompensatedSum sum;
  for (const auto& t : skorohod_terms(kernel, lambda.sites())) {
    sum.add(t.coefficient * charlier_monomial(t.profile, lambda, mu.counts().view()));
  }
  out.value = sum.value();
  return out;
}

Functional skorohod_functional(const SkorohodKernel& kernel, const FiniteIntensity& lambda) {
  if (kernel.sections.size() != lambda.sites()) throw DomainError("kernel and intensity disagree on k");
  auto terms = skorohod_terms(kernel, lambda.sites());
  // |lambda^M C_M(lambda; x)| <= (lambda + x)^M <= (1 + lambda)^M (1 + x)^M
  Envelope env{0.0, 0.0};
  for (const auto& t : terms) {
    double scale = std::abs(t.coefficient);
    int order = 0;
    for (std::size_t i = 0; i < t.profile.size(); ++i) {
      scale *= std::pow(1.0 + lambda[i], t.profile[i]);
      order += t.profile[i];
    }
    env = envelope_sum(env, Envelope{scale, static_cast<double>(order)});
  }
  return Functional(
             lambda.sites(),
             [terms = std::move(terms), lambda](std::span<const int> n) {
               double s = 0.0;
               for (const auto& t : terms) s += t.coefficient * charlier_monomial(t.profile, lambda, n);
               return s;
             },
             "delta(h)")
      .with_envelope(env);
}

bool DualityCheck::agrees(double slack) const {
  const double a = std::abs(lhs.value - rhs_chaos.value);
  const double b = std::abs(lhs.value - rhs_pathwise.value);
  return a <= lhs.error_bound + rhs_chaos.error_bound + slack &&
         b <= lhs.error_bound + rhs_pathwise.error_bound + slack;
}

DualityCheck duality_check(const Functional& f, const SiteFunctional& h, const FiniteIntensity& lambda, int n_max,
                           const TruncationPolicy& policy) {
  if (f.sites() != lambda.sites() || h.sites() != lambda.sites()) throw DomainError("f, h and intensity disagree on k");
  const std::size_t k = lambda.sites();

  Functional inner(
      k,
      [f, h, lambda](std::span<const int> n) {
        std::vector<int> up(n.begin(), n.end());
        const double base = f(n);
        double s = 0.0;
        for (std::size_t y = 0; y < up.size(); ++y) {
          ++up[y];
          s += lambda[y] * (f(up) - base) * h(n, y);
          --up[y];
        }
        return s;
      },
      "<Df, h>");
  if (f.envelope() && h.envelope()) {
    // |D_y f(n)| <= c_f (2^p + 1) prod (1 + n_i)^p <= c_f 2^{p+1} prod (1 + n_i)^p
    const Envelope& ef = *f.envelope();
    const Envelope& eh = *h.envelope();
    inner = inner.with_envelope(
        Envelope{lambda.total() * ef.scale * std::pow(2.0, ef.power + 1.0) * eh.scale,
                 ef.power + eh.power});
  }

  DualityCheck out;
  const SkorohodKernel kernel = skorohod_kernel(h, lambda, n_max, policy);
  out.truncated = kernel.truncated;

  Functional pathwise(
      k,
      [h, lambda](std::span<const int> n) {
        return skorohod_pathwise(h, PathConfiguration(Counts(std::vector<int>(n.begin(), n.end()))), lambda);
      },
      "delta'(h)");
  if (h.envelope()) pathwise = pathwise.with_envelope(skorohod_pathwise_envelope(*h.envelope(), lambda));

  out.lhs = truncated_expectation(lambda, inner, policy);
  out.rhs_chaos = truncated_expectation(lambda, product(f, skorohod_functional(kernel, lambda)), policy);
  out.rhs_pathwise = truncated_expectation(lambda, product(f, pathwise), policy);
  return out;
}

}  // namespace poisfock
