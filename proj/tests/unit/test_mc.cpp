#include "poisfock/mc.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "../oracles.hpp"
#include "poisfock/chaos.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/rng.hpp"

using namespace poisfock;

namespace {

constexpr std::size_t kSamples = 100000;

std::vector<double> site_counts(const SampleBatch& b, std::size_t site) {
  return evaluate(b, [site](const Draw& d) { return double(d.path.counts()[site]); });
}

}  // namespace

TEST(Estimate, PairwiseSum) {
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i);
  EXPECT_EQ(pairwise_sum(v), 999.0 * 1000.0 / 2.0);
  // 1 + many tiny terms: pairwise keeps them
  std::vector<double> w(1 << 20, 1e-16);
  w[0] = 1.0;
  EXPECT_NEAR(pairwise_sum(w), 1.0 + (w.size() - 1) * 1e-16, 1e-15);
}

TEST(Estimate, MeanAndStandardError) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto e = estimate(v);
  EXPECT_EQ(e.n, 4u);
  EXPECT_DOUBLE_EQ(e.mean, 2.5);
  // sample sd = sqrt(5/3)
  EXPECT_NEAR(e.std_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(estimate(std::vector<double>{7.0, 7.0}).std_error, 0.0);
}

TEST(Estimate, ZScore) {
  EXPECT_EQ(z_score(1.0, 0.0, 1.0), 0.0);
  EXPECT_TRUE(std::isinf(z_score(1.5, 0.0, 1.0)));
  EXPECT_DOUBLE_EQ(z_score(1.5, 0.25, 1.0), 2.0);
}

TEST(Rng, UniformRange) {
  CounterRng rng(1, 2);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u;
  }
  EXPECT_NEAR(mean / 100000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(Rng, PoissonVariateMoments) {
  for (double lambda : {0.05, 1.0, 7.5, 29.9, 30.0, 55.0, 400.0}) {
    CounterRng rng(99, 0);
    std::vector<double> x(kSamples);
    for (auto& v : x) v = sample_poisson_variate(lambda, rng);
    const auto e = estimate(x);
    EXPECT_LE(std::abs(z_score(e.mean, e.std_error, lambda)), 4.0) << lambda;
    std::vector<double> sq(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) sq[i] = (x[i] - lambda) * (x[i] - lambda);
    const auto v = estimate(sq);
    EXPECT_LE(std::abs(z_score(v.mean, v.std_error, lambda)), 4.0) << lambda;
  }
}

TEST(Rng, PoissonVariateFrequencies) {
  // chi-square goodness of fit on both sides of the method switch
  for (double lambda : {3.0, 45.0}) {
    CounterRng rng(5, 1);
    const int lo = std::max(0, int(lambda - 4 * std::sqrt(lambda)));
    const int hi = int(lambda + 4 * std::sqrt(lambda));
    std::vector<double> observed(hi - lo + 3, 0.0);
    for (std::size_t i = 0; i < kSamples; ++i) {
      const int x = sample_poisson_variate(lambda, rng);
      observed[x < lo ? 0 : x > hi ? observed.size() - 1 : x - lo + 1] += 1.0;
    }
    double below = 0.0;
    for (int n = 0; n < lo; ++n) below += oracle::pmf(lambda, n);
    double chi2 = 0.0;
    double inside = 0.0;
    for (int n = lo; n <= hi; ++n) {
      const double e = kSamples * oracle::pmf(lambda, n);
      inside += oracle::pmf(lambda, n);
      chi2 += (observed[n - lo + 1] - e) * (observed[n - lo + 1] - e) / e;
    }
    const double above = 1.0 - below - inside;
    if (below > 0) chi2 += std::pow(observed[0] - kSamples * below, 2) / (kSamples * below);
    chi2 += std::pow(observed.back() - kSamples * above, 2) / (kSamples * above);
    const double dof = double(observed.size() - 1 - (below > 0 ? 0 : 1));
    // mean + 5 sd of the chi-square distribution
    EXPECT_LT(chi2, dof + 5.0 * std::sqrt(2.0 * dof)) << lambda;
  }
}

TEST(Sampling, MeanCount) {
  const auto b = sample_poisson(FiniteIntensity({1.0}), 11, kSamples);
  ASSERT_EQ(b.draws.size(), kSamples);
  const auto e = estimate(site_counts(b, 0));
  EXPECT_LE(std::abs(e.mean - 1.0), 4.0 * 1.0 / std::sqrt(double(kSamples)));
}

TEST(Sampling, SitesIndependent) {
  const auto b = sample_poisson(FiniteIntensity({0.5, 2.0}), 12, kSamples);
  const auto prod = evaluate(b, [](const Draw& d) {
    return (d.path.counts()[0] - 0.5) * (d.path.counts()[1] - 2.0);
  });
  const auto e = estimate(prod);
  EXPECT_LE(std::abs(z_score(e.mean, e.std_error, 0.0)), 4.0);
}

TEST(Sampling, MarksUniform) {
  const auto b = sample_poisson(FiniteIntensity({1.5, 0.5}), 13, 20000, true);
  std::vector<double> marks;
  for (const auto& d : b.draws) {
    ASSERT_EQ(d.marks.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
      ASSERT_EQ(d.marks[i].size(), static_cast<std::size_t>(d.path.counts()[i]));
      for (double m : d.marks[i]) {
        ASSERT_GE(m, 0.0);
        ASSERT_LE(m, 1.0);
        marks.push_back(m);
      }
    }
  }
  const auto e = estimate(marks);
  EXPECT_LE(std::abs(z_score(e.mean, e.std_error, 0.5)), 4.0);
}

TEST(Sampling, DeterministicAcrossWorkers) {
  const FiniteIntensity lambda({0.3, 4.0, 45.0});
  const auto a = sample_poisson(lambda, 2024, 5000, true, 1);
  const auto b = sample_poisson(lambda, 2024, 5000, true, 4);
  const auto c = sample_poisson(lambda, 2024, 5000, true, 7);
  ASSERT_EQ(a.draws.size(), b.draws.size());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    EXPECT_EQ(a.draws[i].path, b.draws[i].path);
    EXPECT_EQ(a.draws[i].marks, b.draws[i].marks);
    EXPECT_EQ(a.draws[i].path, c.draws[i].path);
  }
  const auto d = sample_poisson(lambda, 2025, 5000, true, 1);
  int same = 0;
  for (std::size_t i = 0; i < a.draws.size(); ++i) same += a.draws[i].path == d.draws[i].path;
  EXPECT_LT(same, 100);
}

TEST(Sampling, PrefixStable) {
  const FiniteIntensity lambda({1.0, 2.0});
  const auto small = sample_poisson(lambda, 3, 10);
  const auto big = sample_poisson(lambda, 3, 1000);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(small.draws[i].path, big.draws[i].path);
}

TEST(Sampling, RejectsEmpty) { EXPECT_THROW(sample_poisson(FiniteIntensity({1.0}), 1, 0), DomainError); }

TEST(Sampling, VarianceMatchesFockCovariance) {
  const std::vector<double> lam{0.8, 1.5};
  const FiniteIntensity lambda(lam);
  const auto b = sample_poisson(lambda, 21, kSamples);
  for (const auto& f : {catalog::quadratic_count(2, {0, 1}), catalog::threshold_indicator(2, {0}, 1),
                        catalog::exponential({0.5, 0.25})}) {
    const double var = fock_covariance(f, f, lambda, 8).total;
    const double mean = oracle::expectation([&](std::span<const int> n) { return f(n); }, lam, 40);
    const auto sq = evaluate(b, [&](const Draw& d) {
      const double x = f(d.path.counts()) - mean;
      return x * x;
    });
    const auto e = estimate(sq);
    EXPECT_LE(std::abs(z_score(e.mean, e.std_error, var)), 4.0) << f.label() << " mc=" << e.mean << " fock=" << var;
  }
}

TEST(Jsonl, Format) {
  const auto b = sample_poisson(FiniteIntensity({1.0, 3.0}), 8, 3);
  std::ostringstream out;
  write_jsonl(b, out);
  std::istringstream in(out.str());
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_FALSE(j.contains("marks"));
    EXPECT_EQ(j["counts"].get<std::vector<int>>(), b.draws[i].path.counts().occupations());
    ++i;
  }
  EXPECT_EQ(i, 3u);

  const auto m = sample_poisson(FiniteIntensity({2.0}), 8, 2, true);
  std::ostringstream mout;
  write_jsonl(m, mout);
  const auto first = nlohmann::json::parse(mout.str().substr(0, mout.str().find('\n')));
  EXPECT_EQ(first["marks"].size(), 1u);
  EXPECT_EQ(first["marks"][0].size(), static_cast<std::size_t>(first["counts"][0].get<int>()));
}

TEST(Mecke, Examples) {
  const FiniteIntensity one({1.0});
  const SiteFunctional unit(1, [](std::span<const int>, std::size_t) { return 1.0; });
  auto r = mecke_check(unit, one, 1, kSamples);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_EQ(r.rhs.mean, 1.0);
  EXPECT_LE(std::abs(z_score(r.lhs.mean, r.lhs.std_error, 1.0)), 4.0);

  const FiniteIntensity split({0.4, 0.6});
  const SiteFunctional total(2, [](std::span<const int> n, std::size_t) { return double(n[0] + n[1]); });
  r = mecke_check(total, split, 2, kSamples);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_LE(std::abs(z_score(r.lhs.mean, r.lhs.std_error, 2.0)), 4.0);
  EXPECT_LE(std::abs(z_score(r.rhs.mean, r.rhs.std_error, 2.0)), 4.0);

  const FiniteIntensity two({1.0, 1.0});
  const SiteFunctional cross(2, [](std::span<const int> n, std::size_t y) { return y == 0 ? double(n[1]) : 0.0; });
  r = mecke_check(cross, two, 3, kSamples);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_LE(std::abs(z_score(r.lhs.mean, r.lhs.std_error, 1.0)), 4.0);
  EXPECT_LE(std::abs(z_score(r.rhs.mean, r.rhs.std_error, 1.0)), 4.0);
}

TEST(Mecke, EmptyIndicatorIsExactlyZero) {
  // no point sees an empty configuration, and eta + delta is never empty
  const FiniteIntensity one({1.0});
  const SiteFunctional h(1, [](std::span<const int> n, std::size_t) { return n[0] == 0 ? 1.0 : 0.0; });
  const auto r = mecke_check(h, one, 4, kSamples);
  EXPECT_EQ(r.lhs.mean, 0.0);
  EXPECT_EQ(r.rhs.mean, 0.0);
  EXPECT_EQ(r.z, 0.0);
}

TEST(MeckeMultivariate, Examples) {
  const TupleFunctional unit = [](std::span<const int>, std::span<const std::size_t>) { return 1.0; };
  auto r = mecke_multivariate_check(unit, 2, FiniteIntensity({0.25, 0.75}), 5, kSamples);
  EXPECT_NEAR(r.rhs.mean, 1.0, 1e-12);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_LE(std::abs(z_score(r.lhs.mean, r.lhs.std_error, 1.0)), 4.0);

  r = mecke_multivariate_check(unit, 3, FiniteIntensity({2.0}), 6, kSamples);
  EXPECT_NEAR(r.rhs.mean, 8.0, 1e-12);
  EXPECT_LE(std::abs(r.z), 4.0);
  EXPECT_LE(std::abs(z_score(r.lhs.mean, r.lhs.std_error, 8.0)), 4.0);

  EXPECT_THROW(mecke_multivariate_check(unit, 0, FiniteIntensity({1.0}), 1, 10), DomainError);
}

TEST(MeckeMultivariate, OrderOneMatchesMecke) {
  const FiniteIntensity lambda({0.7, 1.3});
  const SiteFunctional h(2, [](std::span<const int> n, std::size_t y) { return (y + 1.0) * n[0] - n[1] * n[1]; });
  const TupleFunctional t = [](std::span<const int> n, std::span<const std::size_t> y) {
    return (y[0] + 1.0) * n[0] - n[1] * n[1];
  };
  const auto a = mecke_check(h, lambda, 9, 20000);
  const auto b = mecke_multivariate_check(t, 1, lambda, 9, 20000);
  EXPECT_DOUBLE_EQ(a.lhs.mean, b.lhs.mean);
  EXPECT_DOUBLE_EQ(a.rhs.mean, b.rhs.mean);
  EXPECT_DOUBLE_EQ(a.z, b.z);
}

TEST(MeckeMultivariate, SiteDependentKernel) {
  const FiniteIntensity lambda({0.5, 1.0});
  const TupleFunctional h = [](std::span<const int> n, std::span<const std::size_t> y) {
    return (y[0] == y[1] ? 2.0 : -1.0) + 0.1 * n[y[0]];
  };
  const auto r = mecke_multivariate_check(h, 2, lambda, 10, kSamples);
  EXPECT_LE(std::abs(r.z), 4.0);
}

TEST(Laplace, Exact) {
  const FiniteIntensity one({1.0});
  EXPECT_EQ(laplace_exact(std::vector<double>{0.0}, one), 1.0);
  EXPECT_NEAR(laplace_exact(std::vector<double>{1.0}, one), 0.531464, 1e-6);
  EXPECT_NEAR(laplace_exact(std::vector<double>{std::log(2.0)}, FiniteIntensity({2.0})), std::exp(-1.0), 1e-15);
  EXPECT_THROW(laplace_exact(std::vector<double>{-1.0}, one), DomainError);
}

TEST(Laplace, MonteCarlo) {
  const FiniteIntensity lambda({1.0, 0.5, 3.0});
  const std::vector<double> v{1.0, 0.2, 0.05};
  const auto r = laplace_check(v, lambda, 14, kSamples);
  EXPECT_NEAR(r.exact, oracle::expectation([&](std::span<const int> n) {
    return std::exp(-(v[0] * n[0] + v[1] * n[1] + v[2] * n[2]));
  }, {1.0, 0.5, 3.0}, 40), 1e-12);
  EXPECT_LE(std::abs(r.z), 4.0);
}
