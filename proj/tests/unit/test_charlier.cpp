#include "poisfock/charlier.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "poisfock/errors.hpp"
#include "poisfock/functional.hpp"

using namespace poisfock;
using hp = boost::multiprecision::cpp_dec_float_50;

namespace {

// Defining sum evaluated in 50 decimal digits.
hp charlier_hp(int n, hp lambda, int x) {
  hp total = 0;
  for (int j = 0; j <= n; ++j) {
    hp binom = 1;
    for (int r = 0; r < j; ++r) binom = binom * (n - r) / (r + 1);
    hp falling = 1;
    for (int r = 0; r < j; ++r) falling *= hp(x - r);
    hp term = binom * falling / boost::multiprecision::pow(lambda, j);
    total += (n - j) % 2 == 0 ? term : hp(-term);
  }
  return total;
}

}  // namespace

TEST(DescendingFactorial, Examples) {
  EXPECT_EQ(descending_factorial(4, 2), 12.0);
  EXPECT_EQ(descending_factorial(7.5, 0), 1.0);
  EXPECT_EQ(descending_factorial(2, 3), 0.0);
  EXPECT_THROW(descending_factorial(2, -1), DomainError);
}

TEST(Charlier, Examples) {
  EXPECT_EQ(charlier(0, 0.7, 3.0), 1.0);
  EXPECT_NEAR(charlier(1, 2.0, 2.0), 0.0, 1e-15);
  EXPECT_NEAR(charlier(2, 1.0, 2.0), -1.0, 1e-15);
}

TEST(Charlier, RejectsBadParameters) {
  EXPECT_THROW(charlier(2, 0.0, 1.0), DomainError);
  EXPECT_THROW(charlier(2, -1.0, 1.0), DomainError);
  EXPECT_THROW(charlier(-1, 1.0, 1.0), DomainError);
  EXPECT_THROW(charlier_second_moment(2, 0.0), DomainError);
}

TEST(Charlier, SecondMoment) {
  EXPECT_EQ(charlier_second_moment(0, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(charlier_second_moment(2, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(charlier_second_moment(3, 2.0), 0.75);
}

TEST(Charlier, MatchesHighPrecisionSum) {
  for (double lambda : {0.5, 1.0, 2.0, 5.0}) {
    for (int n = 0; n <= 12; ++n) {
      for (int x = 0; x <= 20; ++x) {
        const double ref = static_cast<double>(charlier_hp(n, hp(lambda), x));
        EXPECT_NEAR(charlier(n, lambda, x), ref, 1e-11 * std::max(1.0, std::abs(ref)))
            << "n=" << n << " lambda=" << lambda << " x=" << x;
      }
    }
  }
}

TEST(Charlier, MatchesGeneratingFunction) {
  for (int n = 0; n <= 8; ++n) {
    for (int x = 0; x <= 10; ++x) {
      const double ref = oracle::charlier_series(n, 1.5, x);
      EXPECT_NEAR(charlier(n, 1.5, x), ref, 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

// The three-term recurrence, checked against the high-precision defining sum.
TEST(Charlier, RecurrenceHolds) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    for (int n = 1; n <= 20; ++n) {
      for (int x = 0; x <= 20; ++x) {
        const hp l(lambda);
        const hp lhs = charlier_hp(n + 1, l, x);
        const hp rhs = ((hp(x) - n - l) * charlier_hp(n, l, x) - hp(n) * charlier_hp(n - 1, l, x)) / l;
        const hp scale = boost::multiprecision::max(hp(1), boost::multiprecision::abs(lhs));
        EXPECT_LT(static_cast<double>(boost::multiprecision::abs(lhs - rhs) / scale), 1e-12);

        // the double implementation against the same identity
        const double c0 = charlier(n - 1, lambda, x);
        const double c1 = charlier(n, lambda, x);
        const double c2 = charlier(n + 1, lambda, x);
        const double r = ((x - n - lambda) * c1 - n * c0) / lambda;
        const double ref = static_cast<double>(lhs);
        EXPECT_NEAR(c2, ref, 1e-12 * std::max(1.0, std::abs(ref))) << "n=" << n + 1 << " x=" << x;
        EXPECT_NEAR(r, ref, 1e-12 * std::max({1.0, std::abs(ref), std::abs(c1) * (x + n + lambda) / lambda}));
      }
    }
  }
}

TEST(Charlier, HighDegreeUsesStableRoute) {
  for (int n : {31, 35, 40}) {
    for (int x : {0, 5, 20, 40}) {
      const double ref = static_cast<double>(charlier_hp(n, hp(2.0), x));
      EXPECT_NEAR(charlier(n, 2.0, x), ref, 1e-9 * std::max(1.0, std::abs(ref))) << "n=" << n << " x=" << x;
    }
  }
}

TEST(Charlier, ScaledIsIntegerExact) {
  // lambda^2 C_2(1; 3) = 1 - 6 + 6
  EXPECT_EQ(scaled_charlier(2, 1.0, 3.0), 1.0);
  for (int n = 0; n <= 6; ++n) {
    for (int x = 0; x <= 8; ++x) {
      const double v = scaled_charlier(n, 2.0, x);
      EXPECT_EQ(v, std::round(v));
      EXPECT_NEAR(v, std::pow(2.0, n) * charlier(n, 2.0, x), 1e-9 * std::max(1.0, std::abs(v)));
    }
  }
}

TEST(Poisson, PmfAndTail) {
  for (double lambda : {0.3, 1.0, 4.0}) {
    for (int n = 0; n <= 25; ++n) EXPECT_NEAR(poisson_pmf(lambda, n), oracle::pmf(lambda, n), 1e-15);
    double mass = 0.0;
    for (int n = 0; n <= 6; ++n) mass += oracle::pmf(lambda, n);
    EXPECT_NEAR(poisson_tail(lambda, 6), 1.0 - mass, 1e-14);
  }
}

TEST(Poisson, CapIsMinimal) {
  for (double lambda : {0.2, 1.0, 3.0, 40.0}) {
    for (double eps : {1e-6, 1e-13, 1e-16}) {
      const int cap = poisson_cap(lambda, eps);
      EXPECT_LE(poisson_tail(lambda, cap), eps);
      if (cap > 0) EXPECT_GT(poisson_tail(lambda, cap - 1), eps);
    }
  }
}

TEST(Poisson, PowerTailBoundsTheMoment) {
  // E(1+X)^2 = 1 + 3 lambda + lambda^2
  EXPECT_NEAR(poisson_power_tail(1.0, 2.0, -1), 5.0, 1e-12);
  double head = 0.0;
  for (int n = 0; n <= 4; ++n) head += oracle::pmf(2.0, n) * std::pow(1.0 + n, 3);
  const double full = oracle::expectation([](std::span<const int> n) { return std::pow(1.0 + n[0], 3); }, {2.0}, 80);
  EXPECT_GE(poisson_power_tail(2.0, 3.0, 4), full - head - 1e-12);
  EXPECT_LE(poisson_power_tail(2.0, 3.0, 4), 1.01 * (full - head));
}

TEST(TruncationPolicy, CapsSplitTheBudget) {
  TruncationPolicy p;
  p.tail_epsilon = 1e-10;
  const FiniteIntensity lambda({1.0, 2.0, 0.5});
  const auto caps = p.caps_for(lambda);
  ASSERT_EQ(caps.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(caps[i], poisson_cap(lambda[i], 1e-10 / 3));
  p.tail_epsilon = 0.0;
  EXPECT_THROW(p.validate(), DomainError);
}

TEST(TruncatedExpectation, Examples) {
  const FiniteIntensity one({1.0});
  const auto linear = catalog::linear_count(1, {0});
  const auto r1 = truncated_expectation(one, linear);
  EXPECT_NEAR(r1.value, 1.0, r1.error_bound + 1e-15);
  EXPECT_FALSE(r1.heuristic);

  const auto r2 = truncated_expectation(one, catalog::quadratic_count(1, {0}));
  EXPECT_NEAR(r2.value, 2.0, r2.error_bound);
  EXPECT_NEAR(r2.value, 2.0, 1e-12);

  const auto r3 = truncated_expectation(one, catalog::exponential({1.0}));
  EXPECT_NEAR(r3.value, std::exp(-(1.0 - std::exp(-1.0))), 1e-13);
  EXPECT_NEAR(r3.value, 0.531464, 1e-6);
}

TEST(TruncatedExpectation, ErrorBoundCoversTheTruth) {
  // coarse policy so that the bound is visibly active
  TruncationPolicy p;
  p.tail_epsilon = 1e-4;
  const FiniteIntensity lambda({1.0, 2.0});
  const auto f = catalog::count_power(2, {0, 1}, 3);
  const auto r = truncated_expectation(lambda, f, p);
  const double truth = oracle::expectation([&](std::span<const int> n) { return f(n); }, {1.0, 2.0}, 60);
  EXPECT_GT(std::abs(r.value - truth), 0.0);
  EXPECT_LE(std::abs(r.value - truth), r.error_bound);
}

TEST(TruncatedExpectation, ErrorBoundShrinksWithCaps) {
  const FiniteIntensity lambda({1.5, 0.5});
  const auto f = catalog::count_power(2, {0, 1}, 2);
  double previous = INFINITY;
  for (int pad = 0; pad <= 6; ++pad) {
    TruncationPolicy p;
    p.tail_epsilon = 1e-6;
    p.cap_padding = pad;
    const auto r = truncated_expectation(lambda, f, p);
    EXPECT_LE(r.error_bound, previous);
    previous = r.error_bound;
  }
}

TEST(TruncatedExpectation, Errors) {
  const FiniteIntensity lambda({1.0});
  const Functional bare(1, [](std::span<const int> n) { return 1.0 * n[0]; }, "bare");
  EXPECT_THROW(truncated_expectation(lambda, bare), MissingEnvelopeError);

  TruncationPolicy adaptive;
  adaptive.mode = TruncationMode::AdaptiveShell;
  const auto r = truncated_expectation(lambda, bare, adaptive);
  EXPECT_TRUE(r.heuristic);
  EXPECT_NEAR(r.value, 1.0, 1e-12);

  const Functional bad = Functional(1, [](std::span<const int> n) { return n[0] == 3 ? NAN : 0.0; }, "bad")
                             .with_envelope(Envelope{1.0, 0.0});
  EXPECT_THROW(truncated_expectation(lambda, bad), EvaluationError);
}

// E[C_n C_m] = 1{n = m} n! lambda^{-n}
TEST(TruncatedExpectation, CharlierOrthogonality) {
  for (double lambda : {0.5, 1.0, 2.0}) {
    const FiniteIntensity li({lambda});
    for (int n = 0; n <= 6; ++n) {
      for (int m = 0; m <= 6; ++m) {
        const Functional f = Functional(
                                 1,
                                 [=](std::span<const int> x) {
                                   return charlier(n, lambda, x[0]) * charlier(m, lambda, x[0]);
                                 },
                                 "CnCm")
                                 .with_envelope(Envelope{std::pow(1.0 + 1.0 / lambda, n + m), double(n + m)});
        const auto r = truncated_expectation(li, f);
        const double target = n == m ? charlier_second_moment(n, lambda) : 0.0;
        EXPECT_NEAR(r.value, target, r.error_bound + 1e-10) << "n=" << n << " m=" << m << " lambda=" << lambda;
      }
    }
  }
}
