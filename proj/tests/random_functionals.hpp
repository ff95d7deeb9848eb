#pragma once

// Random DSL sources for property tests, each paired with an evaluator that
// does not go through the parser.

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <fmt/format.h>

namespace randfn {

struct Monomial {
  double coefficient;
  std::vector<int> powers;
};

struct Polynomial {
  std::size_t sites;
  std::vector<Monomial> terms;

  double operator()(std::span<const int> n) const {
    double s = 0.0;
    for (const auto& m : terms) {
      double v = m.coefficient;
      for (std::size_t i = 0; i < sites; ++i) v *= std::pow(static_cast<double>(n[i]), m.powers[i]);
      s += v;
    }
    return s;
  }

  int degree() const {
    int d = 0;
    for (const auto& m : terms) {
      int t = 0;
      for (int p : m.powers) t += p;
      d = std::max(d, t);
    }
    return d;
  }

  std::string source() const {
    std::string s;
    for (const auto& m : terms) {
      if (!s.empty()) s += " + ";
      s += fmt::format("({})", m.coefficient);
      for (std::size_t i = 0; i < sites; ++i) {
        if (m.powers[i] > 0) s += fmt::format("*n{}^{}", i + 1, m.powers[i]);
      }
    }
    return s;
  }
};

// Polynomial of total degree <= max_degree with coefficients in multiples of 1/4.
inline Polynomial polynomial(std::mt19937& rng, std::size_t sites, int max_degree) {
  std::uniform_int_distribution<int> nterms(1, 4);
  std::uniform_int_distribution<int> coef(-8, 8);
  std::uniform_int_distribution<int> site(0, static_cast<int>(sites) - 1);
  std::uniform_int_distribution<int> deg(0, max_degree);
  Polynomial p{sites, {}};
  const int count = nterms(rng);
  for (int t = 0; t < count; ++t) {
    Monomial m{coef(rng) / 4.0, std::vector<int>(sites, 0)};
    if (m.coefficient == 0.0) m.coefficient = 1.0;
    const int d = deg(rng);
    for (int j = 0; j < d; ++j) ++m.powers[static_cast<std::size_t>(site(rng))];
    p.terms.push_back(std::move(m));
  }
  return p;
}

// Nondecreasing DSL functional: a nonnegative combination of increasing pieces.
struct Increasing {
  std::string source;
  std::vector<double> weights;   // for n_i, ind(n_i >= t_i), min(n_i, c_i), n_i * n_j
  std::vector<int> thresholds;
  std::vector<int> clips;
  std::size_t pair_a = 0, pair_b = 0;

  double operator()(std::span<const int> n) const {
    const std::size_t k = thresholds.size();
    double s = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      s += weights[4 * i] * n[i];
      s += weights[4 * i + 1] * (n[i] >= thresholds[i] ? 1.0 : 0.0);
      s += weights[4 * i + 2] * std::min(n[i], clips[i]);
    }
    s += weights[3] * n[pair_a] * n[pair_b];
    return s;
  }
};

inline Increasing increasing(std::mt19937& rng, std::size_t sites) {
  std::uniform_int_distribution<int> w(0, 4);
  std::uniform_int_distribution<int> t(1, 3);
  std::uniform_int_distribution<int> site(0, static_cast<int>(sites) - 1);
  Increasing f;
  f.weights.resize(4 * sites);
  for (auto& x : f.weights) x = w(rng) / 2.0;
  for (std::size_t i = 0; i < sites; ++i) {
    f.thresholds.push_back(t(rng));
    f.clips.push_back(t(rng));
  }
  f.pair_a = static_cast<std::size_t>(site(rng));
  f.pair_b = static_cast<std::size_t>(site(rng));
  std::string s = "0";
  for (std::size_t i = 0; i < sites; ++i) {
    s += fmt::format(" + {}*n{} + {}*ind(n{} >= {}) + {}*min(n{}, {})", f.weights[4 * i], i + 1,
                     f.weights[4 * i + 1], i + 1, f.thresholds[i], f.weights[4 * i + 2], i + 1, f.clips[i]);
  }
  s += fmt::format(" + {}*n{}*n{}", f.weights[3], f.pair_a + 1, f.pair_b + 1);
  f.source = s;
  return f;
}

}  // namespace randfn
