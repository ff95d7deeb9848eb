#include "poisfock/mc.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <ostream>

#include "poisfock/errors.hpp"
#include "poisfock/rng.hpp"

namespace poisfock {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 8;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

McEstimate estimate(std::span<const double> values) {
  McEstimate e;
  e.n = values.size();
  if (e.n == 0) throw DomainError("cannot estimate from zero samples");
  e.mean = pairwise_sum(values) / static_cast<double>(e.n);
  if (e.n > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - e.mean) * (values[i] - e.mean);
    const double var = pairwise_sum(sq) / static_cast<double>(e.n - 1);
    e.std_error = std::sqrt(var / static_cast<double>(e.n));
  }
  return e;
}

double z_score(double mean, double std_error, double target) {
  const double diff = mean - target;
  if (std_error > 0.0) return diff / std_error;
  if (diff == 0.0) return 0.0;
  return diff > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

SampleBatch sample_poisson(const FiniteIntensity& lambda, std::uint64_t seed, std::size_t n_samples, bool marked,
                           std::size_t workers) {
  if (n_samples == 0) throw DomainError("n_samples must be at least 1");
  SampleBatch batch;
  batch.seed = seed;
  batch.intensity.assign(lambda.weights().begin(), lambda.weights().end());
  batch.marked = marked;
  batch.draws.resize(n_samples);
  const std::size_t k = lambda.sites();
  parallel_for(
      n_samples,
      [&](std::size_t d) {
        CounterRng rng(seed, d);
        std::vector<int> n(k);
        for (std::size_t i = 0; i < k; ++i) n[i] = sample_poisson_variate(lambda[i], rng);
        Draw& draw = batch.draws[d];
        if (marked) {
          draw.marks.resize(k);
          for (std::size_t i = 0; i < k; ++i) {
            draw.marks[i].resize(static_cast<std::size_t>(n[i]));
            for (double& t : draw.marks[i]) t = rng.uniform();
          }
        }
        draw.path = PathConfiguration(Counts(std::move(n)));
      },
      workers);
  return batch;
}

void write_jsonl(const SampleBatch& batch, std::ostream& out) {
  for (const Draw& d : batch.draws) {
    nlohmann::json line;
    line["counts"] = d.path.counts().occupations();
    if (batch.marked) line["marks"] = d.marks;
    out << line.dump() << '\n';
  }
}

std::vector<double> evaluate(const SampleBatch& batch, const std::function<double(const Draw&)>& fn) {
  std::vector<double> values(batch.draws.size());
  parallel_for(values.size(), [&](std::size_t d) { values[d] = fn(batch.draws[d]); });
  return values;
}

namespace {

IdentityCheck paired(const std::vector<double>& lhs, const std::vector<double>& rhs) {
  IdentityCheck c;
  c.lhs = estimate(lhs);
  c.rhs = estimate(rhs);
  std::vector<double> d(lhs.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = lhs[i] - rhs[i];
  c.difference = estimate(d);
  c.z = z_score(c.difference.mean, c.difference.std_error, 0.0);
  return c;
}

// Falling factorial of an integer count.
double falling(int n, int j) {
  double r = 1.0;
  for (int i = 0; i < j; ++i) r *= (n - i);
  return r;
}

}  // namespace

IdentityCheck mecke_check(const SiteFunctional& h, const FiniteIntensity& lambda, std::uint64_t seed,
                          std::size_t n_samples) {
  if (h.sites() != lambda.sites()) throw DomainError("integrand and intensity disagree on k");
  const SampleBatch batch = sample_poisson(lambda, seed, n_samples);
  const std::size_t k = lambda.sites();
  const auto lhs = evaluate(batch, [&](const Draw& d) {
    const auto n = d.path.counts().view();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (n[i] > 0) s += n[i] * h(n, i);
    }
    return s;
  });
  const auto rhs = evaluate(batch, [&](const Draw& d) {
    std::vector<int> n(d.path.counts().occupations());
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      ++n[i];
      s += lambda[i] * h(n, i);
      --n[i];
    }
    return s;
  });
  return paired(lhs, rhs);
}

IdentityCheck mecke_multivariate_check(const TupleFunctional& h, int m, const FiniteIntensity& lambda,
                                       std::uint64_t seed, std::size_t n_samples) {
  if (m < 1) throw DomainError("tuple order m must be at least 1");
  const SampleBatch batch = sample_poisson(lambda, seed, n_samples);
  const std::size_t k = lambda.sites();

  // all site tuples y in Y^m
  std::vector<std::vector<std::size_t>> tuples;
  {
    std::vector<std::size_t> y(static_cast<std::size_t>(m), 0);
    for (;;) {
      tuples.push_back(y);
      std::size_t j = 0;
      while (j < y.size() && ++y[j] == k) y[j++] = 0;
      if (j == y.size()) break;
    }
  }

  const auto lhs = evaluate(batch, [&](const Draw& d) {
    const auto n = d.path.counts().view();
    double s = 0.0;
    for (const auto& y : tuples) {
      // ordered tuples of distinct points landing on y: prod_i (n_i)_{c_i}
      std::vector<int> c(k, 0);
      for (std::size_t s_ : y) ++c[s_];
      double ways = 1.0;
      for (std::size_t i = 0; i < k; ++i) ways *= falling(n[i], c[i]);
      if (ways != 0.0) s += ways * h(n, y);
    }
    return s;
  });
  const auto rhs = evaluate(batch, [&](const Draw& d) {
    double s = 0.0;
    for (const auto& y : tuples) {
      std::vector<int> n(d.path.counts().occupations());
      double w = 1.0;
      for (std::size_t s_ : y) {
        ++n[s_];
        w *= lambda[s_];
      }
      s += w * h(n, y);
    }
    return s;
  });
  return paired(lhs, rhs);
}

double laplace_exact(std::span<const double> v, const FiniteIntensity& lambda) {
  if (v.size() != lambda.sites()) throw DomainError("Laplace weights have the wrong number of sites");
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) throw DomainError("Laplace weights must be nonnegative");
    s += lambda[i] * (-std::expm1(-v[i]));
  }
  return std::exp(-s);
}

LaplaceCheck laplace_check(std::span<const double> v, const FiniteIntensity& lambda, std::uint64_t seed,
                           std::size_t n_samples) {
  LaplaceCheck c;
  c.exact = laplace_exact(v, lambda);
  const SampleBatch batch = sample_poisson(lambda, seed, n_samples);
  const auto values = evaluate(batch, [&](const Draw& d) {
    const auto n = d.path.counts().view();
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * n[i];
    return std::exp(-s);
  });
  c.mc = estimate(values);
  c.z = z_score(c.mc.mean, c.mc.std_error, c.exact);
  return c;
}

}  // namespace poisfock
