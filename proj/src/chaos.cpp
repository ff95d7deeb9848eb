#include "poisfock/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "poisfock/errors.hpp"
#include "poisfock/lattice.hpp"
#include "poisfock/parallel.hpp"

namespace poisfock {

MultiIndex::MultiIndex(std::vector<int> m) : m_(std::move(m)) {
  for (int v : m_) {
    if (v < 0) throw DomainError("multi-index entries must be nonnegative");
    order_ += v;
  }
}

MultiIndex::MultiIndex(std::initializer_list<int> m) : MultiIndex(std::vector<int>(m)) {}

MultiIndex MultiIndex::plus(std::size_t site) const {
  std::vector<int> m(m_);
  ++m.at(site);
  return MultiIndex(std::move(m));
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  if (a.order() != b.order()) return a.order() < b.order();
  return std::lexicographical_compare(b.view().begin(), b.view().end(), a.view().begin(), a.view().end());
}

namespace {

void compositions(std::size_t sites, int remaining, std::vector<int>& prefix, std::vector<MultiIndex>& out) {
  if (prefix.size() + 1 == sites) {
    prefix.push_back(remaining);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int first = remaining; first >= 0; --first) {
    prefix.push_back(first);
    compositions(sites, remaining - first, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> multi_indices_of_order(std::size_t sites, int order) {
  if (sites == 0) throw DomainError("multi-indices need at least one site");
  if (order < 0) throw DomainError("multi-index order must be nonnegative");
  std::vector<MultiIndex> out;
  std::vector<int> prefix;
  compositions(sites, order, prefix, out);
  return out;
}

std::vector<MultiIndex> multi_indices_up_to(std::size_t sites, int max_order, int min_order) {
  std::vector<MultiIndex> out;
  for (int n = std::max(min_order, 0); n <= max_order; ++n) {
    auto level = multi_indices_of_order(sites, n);
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

double multinomial(const MultiIndex& m) {
  double log_value = std::lgamma(m.order() + 1.0);
  for (int v : m.view()) log_value -= std::lgamma(v + 1.0);
  return std::round(std::exp(log_value));
}

double chaos_weight(const MultiIndex& m, const FiniteIntensity& lambda) {
  if (m.sites() != lambda.sites()) throw DomainError("multi-index and intensity disagree on k");
  double log_w = 0.0;
  for (std::size_t i = 0; i < m.sites(); ++i) log_w += m[i] * std::log(lambda[i]) - std::lgamma(m[i] + 1.0);
  return std::exp(log_w);
}

ExpectationResult t_n(const Functional& f, const FiniteIntensity& lambda, std::span<const std::size_t> sites,
                      const TruncationPolicy& policy) {
  return truncated_expectation(lambda, iterated_difference(f, sites), policy);
}

const ChaosTerm* ChaosCoefficients::find(const MultiIndex& m) const {
  auto it = std::lower_bound(terms.begin(), terms.end(), m,
                             [](const ChaosTerm& t, const MultiIndex& key) { return graded_lex_less(t.index, key); });
  if (it != terms.end() && it->index == m) return &*it;
  return nullptr;
}

double ChaosCoefficients::coefficient(const MultiIndex& m) const {
  if (m.sites() != sites) throw DomainError("multi-index has the wrong number of sites");
  if (m.order() == 0) return mean;
  if (m.order() > n_max) {
    throw DomainError("coefficient of order " + std::to_string(m.order()) + " requested, only " +
                      std::to_string(n_max) + " computed");
  }
  const ChaosTerm* t = find(m);
  return t ? t->value : 0.0;
}

ExpectationResult direct_variance(const Functional& f, const FiniteIntensity& lambda,
                                  const TruncationPolicy& policy) {
  const ExpectationResult mean = truncated_expectation(lambda, f, policy);
  const Functional dev = centered(f, mean.value);
  ExpectationResult second = truncated_expectation(lambda, product(dev, dev), policy);
  // E(f - m)^2 = Var + (Ef - m)^2
  second.error_bound += mean.error_bound * mean.error_bound;
  second.heuristic = second.heuristic || mean.heuristic;
  return second;
}

ExpectationResult direct_covariance(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                                    const TruncationPolicy& policy) {
  const ExpectationResult mf = truncated_expectation(lambda, f, policy);
  const ExpectationResult mg = truncated_expectation(lambda, g, policy);
  ExpectationResult cross = truncated_expectation(lambda, product(centered(f, mf.value), centered(g, mg.value)), policy);
  cross.error_bound += mf.error_bound * mg.error_bound;
  cross.heuristic = cross.heuristic || mf.heuristic || mg.heuristic;
  return cross;
}

ChaosCoefficients chaos_coefficients(const Functional& f, const FiniteIntensity& lambda, int n_max,
                                     const TruncationPolicy& policy) {
  if (n_max < 1) throw DomainError("n_max must be at least 1");
  if (f.sites() != lambda.sites()) throw DomainError("functional and intensity disagree on k");
  const std::size_t k = lambda.sites();

  // E f(eta + i) for every offset |i| <= n_max
  const std::vector<MultiIndex> offsets = multi_indices_up_to(k, n_max, 0);
  std::vector<ExpectationResult> shifted_means(offsets.size());
  parallel_for(offsets.size(), [&](std::size_t j) {
    shifted_means[j] = truncated_expectation(lambda, shifted(f, offsets[j].view()), policy);
  });
  std::map<std::vector<int>, std::size_t> slot;
  for (std::size_t j = 0; j < offsets.size(); ++j) slot.emplace(offsets[j].values(), j);

  ChaosCoefficients out;
  out.sites = k;
  out.n_max = n_max;
  out.mean = shifted_means[0].value;
  out.mean_error = shifted_means[0].error_bound;
  out.heuristic = std::any_of(shifted_means.begin(), shifted_means.end(),
                              [](const ExpectationResult& r) { return r.heuristic; });

  for (const MultiIndex& m : multi_indices_up_to(k, n_max, 1)) {
    CompensatedSum value;
    double error = 0.0;
    Box(m.values()).for_each([&](std::span<const int> i) {
      double coef = 1.0;
      int size = 0;
      for (std::size_t s = 0; s < k; ++s) {
        coef *= binomial(m[s], i[s]);
        size += i[s];
      }
      const ExpectationResult& e = shifted_means[slot.at(std::vector<int>(i.begin(), i.end()))];
      const double signed_coef = ((m.order() - size) % 2 == 0) ? coef : -coef;
      value.add(signed_coef * e.value);
      error += coef * e.error_bound;
    });
    out.terms.push_back({m, value.value(), error});
  }

  const ExpectationResult var = direct_variance(f, lambda, policy);
  out.variance = var.value;
  out.variance_error = var.error_bound;
  CompensatedSum series;
  double series_error = 0.0;
  for (const ChaosTerm& t : out.terms) {
    const double w = chaos_weight(t.index, lambda);
    series.add(t.value * t.value * w);
    series_error += w * (2.0 * std::abs(t.value) * t.error + t.error * t.error);
  }
  out.residual = out.variance - series.value();
  out.residual_tolerance = out.variance_error + series_error + 1e-12 * std::max(1.0, std::abs(out.variance));
  return out;
}

Functional charlier_product(const FiniteIntensity& lambda, const MultiIndex& m) {
  if (m.sites() != lambda.sites()) throw DomainError("multi-index and intensity disagree on k");
  std::vector<double> lam(lambda.weights().begin(), lambda.weights().end());
  std::vector<int> deg(m.values());
  std::string label = "C_(";
  for (std::size_t i = 0; i < deg.size(); ++i) label += (i ? "," : "") + std::to_string(deg[i]);
  label += ")";
  // |C_m(lambda; x)| <= (1 + 1/lambda)^m (1 + x)^m for integer x >= 0
  double scale = 1.0;
  int top = 0;
  for (std::size_t i = 0; i < deg.size(); ++i) {
    scale *= std::pow(1.0 + 1.0 / lam[i], deg[i]);
    top = std::max(top, deg[i]);
  }
  return Functional(
             lam.size(),
             [lam, deg](std::span<const int> n) {
               double v = 1.0;
               for (std::size_t i = 0; i < deg.size(); ++i) {
                 if (deg[i] > 0) v *= charlier(deg[i], lam[i], n[i]);
               }
               return v;
             },
             std::move(label))
      .with_envelope(Envelope{scale, static_cast<double>(top)});
}

ExpectationResult coefficient_by_orthogonality(const Functional& f, const FiniteIntensity& lambda,
                                               const MultiIndex& m, const TruncationPolicy& policy) {
  if (m.order() < 1) throw DomainError("orthogonality recovery needs |m| >= 1");
  return truncated_expectation(lambda, product(f, charlier_product(lambda, m)), policy);
}

FockCovariance fock_covariance(const ChaosCoefficients& f, const ChaosCoefficients& g,
                               const FiniteIntensity& lambda) {
  if (f.sites != g.sites || f.sites != lambda.sites()) throw DomainError("coefficient families disagree on k");
  const int n_max = std::min(f.n_max, g.n_max);
  FockCovariance out;
  out.per_order.assign(static_cast<std::size_t>(n_max), 0.0);
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(n_max));
  for (const ChaosTerm& tf : f.terms) {
    if (tf.index.order() > n_max) continue;
    const ChaosTerm* tg = g.find(tf.index);
    if (!tg) continue;
    const double w = chaos_weight(tf.index, lambda);
    sums[tf.index.order() - 1].add(tf.value * tg->value * w);
    out.error += w * (std::abs(tf.value) * tg->error + std::abs(tg->value) * tf.error + tf.error * tg->error);
  }
  CompensatedSum total;
  for (int n = 0; n < n_max; ++n) {
    out.per_order[n] = sums[n].value();
    total.add(out.per_order[n]);
  }
  out.total = total.value();
  return out;
}

FockCovariance fock_covariance(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                               int n_max, const TruncationPolicy& policy) {
  const ChaosCoefficients cf = chaos_coefficients(f, lambda, n_max, policy);
  const ChaosCoefficients cg = chaos_coefficients(g, lambda, n_max, policy);
  return fock_covariance(cf, cg, lambda);
}

double reconstruct(const ChaosCoefficients& coeffs, const FiniteIntensity& lambda, std::span<const int> at) {
  if (at.size() != coeffs.sites || lambda.sites() != coeffs.sites) {
    throw DomainError("reconstruction point has the wrong number of sites");
  }
  CompensatedSum sum;
  sum.add(coeffs.mean);
  for (const ChaosTerm& t : coeffs.terms) {
    double v = t.value;
    for (std::size_t i = 0; i < coeffs.sites; ++i) {
      const int mi = t.index[i];
      if (mi == 0) continue;
      v *= scaled_charlier(mi, lambda[i], at[i]) / factorial(mi);
    }
    sum.add(v);
  }
  return sum.value();
}

}  // namespace poisfock
