#include "poisfock/functional.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/intensity.hpp"
#include "poisfock/lattice.hpp"

using namespace poisfock;

TEST(FiniteIntensity, Validation) {
  const FiniteIntensity lambda({0.5, 2.0});
  EXPECT_EQ(lambda.sites(), 2u);
  EXPECT_DOUBLE_EQ(lambda.total(), 2.5);
  EXPECT_DOUBLE_EQ(lambda.scaled(0.5)[1], 1.0);
  EXPECT_THROW(FiniteIntensity({}), DomainError);
  EXPECT_THROW(FiniteIntensity({1.0, 0.0}), DomainError);
  EXPECT_THROW(FiniteIntensity({-1.0}), DomainError);
  EXPECT_THROW(FiniteIntensity({NAN}), DomainError);
  EXPECT_THROW(FiniteIntensity({INFINITY}), DomainError);
}

TEST(Counts, Basics) {
  const Counts n{1, 0, 3};
  EXPECT_EQ(n.total(), 4);
  EXPECT_EQ(n.plus(1), (Counts{1, 1, 3}));
  EXPECT_EQ(n.minus(2, 2), (Counts{1, 0, 1}));
  EXPECT_THROW(n.minus(1), DomainError);
  EXPECT_THROW(Counts({-1}), DomainError);
}

TEST(Difference, Examples) {
  const auto sq = catalog::quadratic_count(1, {0});
  // D (n^2) = 2n + 1
  EXPECT_EQ(difference(sq, 0)({2}), 5.0);
  // D^2 (n^2) = 2, D^3 (n^2) = 0
  EXPECT_EQ(iterated_difference(sq, {0, 0})({7}), 2.0);
  EXPECT_EQ(iterated_difference(sq, {0, 0, 0})({7}), 0.0);
  EXPECT_EQ(iterated_difference(sq, std::span<const std::size_t>{})({3}), 9.0);

  const auto ind = catalog::threshold_indicator(1, {0}, 1);
  EXPECT_EQ(difference(ind, 0)({0}), 1.0);
  EXPECT_EQ(difference(ind, 0)({4}), 0.0);
  EXPECT_EQ(iterated_difference(ind, {0, 0})({0}), -1.0);
}

TEST(Difference, SubsetSumMatchesRecursion) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> count(0, 5);
  std::uniform_int_distribution<std::size_t> site(0, 2);
  const Functional f(
      3, [](std::span<const int> n) { return std::sin(n[0] + 2.0 * n[1]) * std::exp(-0.3 * n[2]) + n[0] * n[1]; },
      "wiggle");
  const oracle::Fn fo = [&](std::span<const int> n) { return f(n); };
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::size_t> ys(1 + trial % 4);
    for (auto& y : ys) y = site(rng);
    std::vector<int> at{count(rng), count(rng), count(rng)};
    const double expected = oracle::difference(fo, ys, at);
    EXPECT_NEAR(iterated_difference_at(f, ys, at), expected, 1e-12);
    EXPECT_NEAR(iterated_difference(f, ys)(at), expected, 1e-12);
  }
}

TEST(Difference, SymmetricInSites) {
  const auto f = catalog::max_occupancy(3);
  const std::vector<int> at{1, 2, 2};
  const std::vector<std::size_t> a{0, 1, 2, 1};
  const std::vector<std::size_t> b{1, 2, 1, 0};
  EXPECT_EQ(iterated_difference_at(f, a, at), iterated_difference_at(f, b, at));
}

TEST(Functional, ArityIsChecked) {
  const auto f = catalog::linear_count(2, {0, 1});
  EXPECT_EQ(f({2, 3}), 5.0);
  EXPECT_THROW(f({1}), DomainError);
}

TEST(Catalog, EnvelopesHoldOnTheLattice) {
  const std::vector<Functional> fs{
      catalog::constant(2, -3.0),       catalog::linear_count(2, {0}),       catalog::quadratic_count(2, {0, 1}),
      catalog::count_power(2, {1}, 3),  catalog::exponential({0.5, 1.0}),    catalog::threshold_indicator(2, {0, 1}, 2),
      catalog::max_occupancy(2)};
  for (const auto& f : fs) {
    ASSERT_TRUE(f.envelope()) << f.label();
    const Envelope e = *f.envelope();
    Box({12, 12}).for_each([&](std::span<const int> n) {
      EXPECT_LE(std::abs(f(n)), e.scale * std::pow(1.0 + n[0], e.power) * std::pow(1.0 + n[1], e.power) + 1e-12)
          << f.label();
    });
  }
}

TEST(Catalog, MonotoneDeclarationsHold) {
  const std::vector<Functional> fs{catalog::quadratic_count(2, {0}), catalog::exponential({0.5, 1.0}),
                                   catalog::threshold_indicator(2, {0, 1}, 2), catalog::max_occupancy(2)};
  for (const auto& f : fs) {
    ASSERT_TRUE(f.monotone_sites());
    Box({8, 8}).for_each([&](std::span<const int> n) {
      for (std::size_t i = 0; i < 2; ++i) {
        const double step = difference(f, i)(n);
        if (f.monotone_sites()->increasing[i]) {
          EXPECT_GE(step, 0.0);
        } else {
          EXPECT_LE(step, 0.0);
        }
      }
    });
  }
}

TEST(Catalog, RejectsBadArguments) {
  EXPECT_THROW(catalog::count_power(2, {}, 1), DomainError);
  EXPECT_THROW(catalog::count_power(2, {2}, 1), DomainError);
  EXPECT_THROW(catalog::count_power(2, {0}, 0), DomainError);
  EXPECT_THROW(catalog::exponential({-1.0}), DomainError);
}

TEST(SiteFunctional, Sections) {
  const SiteFunctional h(2, [](std::span<const int> n, std::size_t y) { return (y + 1.0) * n[0]; }, "h");
  const std::vector<int> n{3, 0};
  EXPECT_EQ(h(n, 1), 6.0);
  EXPECT_EQ(h.section(0)({4, 1}), 4.0);
  EXPECT_THROW(h(n, 2), DomainError);
}

TEST(Envelope, Combinators) {
  const Envelope a{2.0, 1.0};
  const Envelope b{3.0, 2.0};
  EXPECT_EQ(envelope_product(a, b).scale, 6.0);
  EXPECT_EQ(envelope_product(a, b).power, 3.0);
  EXPECT_EQ(envelope_sum(a, b).scale, 5.0);
  EXPECT_EQ(envelope_sum(a, b).power, 2.0);
  // |D_y f(n)| for f = n^2 is 2n + 1 <= 2 * 2^2 (1+n)^2
  const std::vector<int> m{1};
  const Envelope d = envelope_difference(Envelope{1.0, 2.0}, m);
  for (int n = 0; n < 50; ++n) EXPECT_LE(2.0 * n + 1.0, d.scale * std::pow(1.0 + n, d.power));
}
