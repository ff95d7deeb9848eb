#include "poisfock/ordered_cov.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "poisfock/chaos.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/lattice.hpp"
#include "poisfock/parallel.hpp"
#include "poisfock/quadrature.hpp"

namespace poisfock {

TimeMarkedKernel TimeMarkedKernel::gauss_legendre(int nodes, TruncationPolicy policy) {
  const QuadratureRule rule = gauss_legendre_unit(nodes);
  return {rule.nodes, rule.weights, policy};
}

void TimeMarkedKernel::validate() const {
  if (nodes.empty() || nodes.size() != weights.size()) throw DomainError("quadrature nodes and weights must match");
  double total = 0.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (!(nodes[j] > 0.0 && nodes[j] < 1.0)) throw DomainError("quadrature nodes must lie in (0, 1)");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("quadrature weights must sum to 1");
  policy.validate();
}

ExpectationResult conditional_difference_mean(const Functional& f, const FiniteIntensity& lambda, std::size_t y,
                                              double s, const Counts& before, const TruncationPolicy& policy) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("time mark s must lie in (0, 1)");
  if (before.sites() != lambda.sites() || f.sites() != lambda.sites()) throw DomainError("f, counts and intensity disagree on k");
  if (y >= lambda.sites()) throw DomainError("site out of range");
  return truncated_expectation(lambda.scaled(1.0 - s), shifted(difference(f, y), before.view()), policy);
}

namespace {

// Dense array over a box of counts, site 0 fastest.
struct Grid {
  std::vector<int> dims;
  std::vector<double> data;

  explicit Grid(std::vector<int> d) : dims(std::move(d)) {
    std::size_t size = 1;
    for (int v : dims) size *= static_cast<std::size_t>(v);
    data.assign(size, 0.0);
  }

  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t i = 0; i < axis; ++i) s *= static_cast<std::size_t>(dims[i]);
    return s;
  }
};

// out[.., b, ..] = sum_z p[z] in[.., b + z, ..] along one axis, for b < out_len.
Grid contract(const Grid& in, std::size_t axis, const std::vector<double>& p, int out_len) {
  std::vector<int> dims = in.dims;
  const int in_len = dims[axis];
  dims[axis] = out_len;
  Grid out(dims);
  const std::size_t inner = in.stride(axis);
  const std::size_t outer = in.data.size() / (inner * static_cast<std::size_t>(in_len));
  const int taps = static_cast<int>(p.size());
  for (std::size_t o = 0; o < outer; ++o) {
    for (int b = 0; b < out_len; ++b) {
      double* dst = &out.data[(o * out_len + b) * inner];
      for (int z = 0; z < taps && b + z < in_len; ++z) {
        const double* src = &in.data[(o * in_len + b + z) * inner];
        for (std::size_t r = 0; r < inner; ++r) dst[r] += p[z] * src[r];
      }
    }
  }
  return out;
}

std::vector<double> pmf_table(double rate, int cap) {
  std::vector<double> p(static_cast<std::size_t>(cap) + 1);
  for (int j = 0; j <= cap; ++j) p[j] = poisson_pmf(rate, j);
  return p;
}

Grid tabulate(const Functional& f, const std::vector<int>& dims) {
  Grid g(dims);
  const std::size_t k = dims.size();
  parallel_for(g.data.size(), [&](std::size_t idx) {
    std::vector<int> n(k);
    std::size_t rest = idx;
    for (std::size_t i = 0; i < k; ++i) {
      n[i] = static_cast<int>(rest % dims[i]);
      rest /= dims[i];
    }
    const double v = f(n);
    if (!std::isfinite(v)) throw EvaluationError("functional is not finite at " + format_counts(n));
    g.data[idx] = v;
  });
  return g;
}

// D_y on the box [0, 2N] from values on [0, 2N + 1].
Grid difference_grid(const Grid& values, std::size_t y, const std::vector<int>& dims) {
  Grid d(dims);
  const std::size_t step = values.stride(y);
  const std::size_t k = dims.size();
  std::vector<int> n(k, 0);
  for (std::size_t idx = 0; idx < d.data.size(); ++idx) {
    std::size_t src = 0;
    for (std::size_t i = k; i-- > 0;) src = src * values.dims[i] + n[i];
    d.data[idx] = values.data[src + step] - values.data[src];
    for (std::size_t i = 0; i < k; ++i) {
      if (++n[i] < dims[i]) break;
      n[i] = 0;
    }
  }
  return d;
}

// h(s, b, y) = E[D_y f(b + zeta)], zeta ~ Poisson((1 - s) lambda) truncated at the caps.
Grid conditional_mean_grid(Grid d, const std::vector<std::vector<double>>& inner_pmf, const std::vector<int>& caps) {
  for (std::size_t i = 0; i < caps.size(); ++i) d = contract(d, i, inner_pmf[i], caps[i] + 1);
  return d;
}

}  // namespace

CovarianceIdentity covariance_identity(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                                       const TimeMarkedKernel& kernel) {
  kernel.validate();
  if (f.sites() != lambda.sites() || g.sites() != lambda.sites()) throw DomainError("f, g and intensity disagree on k");
  const std::size_t k = lambda.sites();
  const std::vector<int> caps = kernel.policy.caps_for(lambda);

  std::vector<int> value_dims(k), diff_dims(k);
  for (std::size_t i = 0; i < k; ++i) {
    diff_dims[i] = 2 * caps[i] + 1;
    value_dims[i] = 2 * caps[i] + 2;
  }
  const Grid fv = tabulate(f, value_dims);
  const bool same = &f == &g;
  const Grid gv = same ? fv : tabulate(g, value_dims);

  std::vector<Grid> df, dg;
  for (std::size_t y = 0; y < k; ++y) {
    df.push_back(difference_grid(fv, y, diff_dims));
    dg.push_back(same ? df.back() : difference_grid(gv, y, diff_dims));
  }

  const std::size_t nodes = kernel.nodes.size();
  std::vector<CovarianceTerm> terms(nodes * k);
  std::vector<double> errors(nodes * k);
  parallel_for(nodes * k, [&](std::size_t job) {
    const std::size_t node = job / k;
    const std::size_t y = job % k;
    const double s = kernel.nodes[node];
    std::vector<std::vector<double>> inner(k), outer(k);
    double inner_mass = 1.0, outer_mass = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      inner[i] = pmf_table((1.0 - s) * lambda[i], caps[i]);
      outer[i] = pmf_table(s * lambda[i], caps[i]);
      double a = 0.0, b = 0.0;
      for (double p : inner[i]) a += p;
      for (double p : outer[i]) b += p;
      inner_mass *= std::min(a, 1.0);
      outer_mass *= std::min(b, 1.0);
    }
    const Grid hf = conditional_mean_grid(df[y], inner, caps);
    const Grid hg = conditional_mean_grid(dg[y], inner, caps);
    Grid prod(hf.dims);
    double largest = 0.0;
    for (std::size_t j = 0; j < prod.data.size(); ++j) {
      prod.data[j] = hf.data[j] * hg.data[j];
      largest = std::max(largest, std::abs(prod.data[j]));
    }
    for (std::size_t i = 0; i < k; ++i) prod = contract(prod, i, outer[i], 1);

    CovarianceTerm& t = terms[job];
    t.node = node;
    t.s = s;
    t.weight = kernel.weights[node];
    t.site = y;
    t.integrand = prod.data[0];
    t.contribution = lambda[y] * t.weight * t.integrand;
    const double dropped = std::max(0.0, 1.0 - inner_mass * inner_mass * outer_mass);
    errors[job] = lambda[y] * t.weight * largest * dropped;
  });

  CovarianceIdentity out;
  out.caps = caps;
  out.per_site.assign(k, 0.0);
  CompensatedSum total;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    total.add(terms[j].contribution);
    out.per_site[terms[j].site] += terms[j].contribution;
    out.error_estimate += errors[j];
  }
  out.value = total.value();
  out.terms = std::move(terms);
  return out;
}

void write_breakdown_csv(const CovarianceIdentity& result, std::ostream& out) {
  out << "node,s,weight,site,integrand,contribution\n";
  for (const auto& t : result.terms) {
    out << fmt::format("{},{:.17g},{:.17g},{},{:.17g},{:.17g}\n", t.node, t.s, t.weight, t.site + 1, t.integrand,
                       t.contribution);
  }
}

void verify_monotone(const Functional& f, const MonotoneSites& partition, const std::vector<int>& caps) {
  if (partition.increasing.size() != f.sites() || caps.size() != f.sites()) {
    throw DomainError("partition, caps and functional disagree on k");
  }
  Box(caps).for_each([&](std::span<const int> n) {
    std::vector<int> up(n.begin(), n.end());
    const double base = f(n);
    for (std::size_t i = 0; i < up.size(); ++i) {
      ++up[i];
      const double step = f(up) - base;
      --up[i];
      const double slack = 1e-12 * std::max(1.0, std::abs(base));
      const bool ok = partition.increasing[i] ? step >= -slack : step <= slack;
      if (!ok) {
        throw MonotonicityViolation(fmt::format("{} is not {} in site {} at {}", f.label().empty() ? "functional" : f.label(),
                                                partition.increasing[i] ? "increasing" : "decreasing", i + 1,
                                                format_counts(n)),
                                    std::vector<int>(n.begin(), n.end()), i);
      }
    }
  });
}

FkgResult fkg_check(const Functional& f, const Functional& g, const FiniteIntensity& lambda,
                    const TruncationPolicy& policy, double tolerance) {
  if (f.sites() != lambda.sites() || g.sites() != lambda.sites()) throw DomainError("f, g and intensity disagree on k");
  if (!f.monotone_sites() || !g.monotone_sites()) {
    throw PartitionMismatch("both functionals must declare a monotone partition");
  }
  if (*f.monotone_sites() != *g.monotone_sites()) {
    throw PartitionMismatch("the functionals declare different monotone partitions");
  }
  const auto caps = policy.caps_for(lambda);
  verify_monotone(f, *f.monotone_sites(), caps);
  verify_monotone(g, *g.monotone_sites(), caps);

  const ExpectationResult cov = direct_covariance(f, g, lambda, policy);
  FkgResult out;
  out.covariance = cov.value;
  out.error_bound = cov.error_bound;
  out.certified_nonnegative = cov.value >= -(tolerance + cov.error_bound);
  out.increasing = f.monotone_sites()->increasing;
  return out;
}

}  // namespace poisfock
