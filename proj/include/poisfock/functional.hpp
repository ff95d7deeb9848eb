#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace poisfock {

/// Point configuration on the finite ground space as occupation numbers (n_0, ..., n_{k-1}).
class Counts {
public:
  Counts() = default;
  explicit Counts(std::vector<int> occupations);
  Counts(std::initializer_list<int> occupations);

  std::size_t sites() const noexcept { return n_.size(); }
  int operator[](std::size_t site) const { return n_.at(site); }
  int total() const noexcept;

  std::span<const int> view() const noexcept { return n_; }
  operator std::span<const int>() const noexcept { return n_; }
  const std::vector<int>& occupations() const noexcept { return n_; }

  /// mu + delta_site
  Counts plus(std::size_t site, int times = 1) const;
  /// mu - delta_site; requires n_site >= times.
  Counts minus(std::size_t site, int times = 1) const;

  friend bool operator==(const Counts&, const Counts&) = default;

private:
  std::vector<int> n_;
};

/// Growth envelope |f(n)| <= scale * prod_i (1 + n_i)^power.
struct Envelope {
  double scale = 1.0;
  double power = 0.0;

  /// Envelope of f(n + offset).
  Envelope shifted(std::span<const int> offset) const;
};

Envelope envelope_product(const Envelope& a, const Envelope& b);
Envelope envelope_sum(const Envelope& a, const Envelope& b);
/// Envelope of an iterated difference of the given multi-index profile (multiplicity per site).
Envelope envelope_difference(const Envelope& e, std::span<const int> multiplicity);

/// Per-site monotonicity: increasing[i] means n_i -> f is nondecreasing, otherwise nonincreasing.
struct MonotoneSites {
  std::vector<bool> increasing;

  friend bool operator==(const MonotoneSites&, const MonotoneSites&) = default;
};

/// A real function of the occupation numbers.
///
/// Functionals are immutable values: copying shares the evaluator, and
/// evaluation is reentrant. The envelope (when present) licenses rigorous
/// truncation error bounds; monotone_sites feeds the FKG check.
class Functional {
public:
  using Body = std::function<double(std::span<const int>)>;

  Functional(std::size_t sites, Body body, std::string label = {});

  double operator()(std::span<const int> counts) const;
  double operator()(std::initializer_list<int> counts) const;

  std::size_t sites() const noexcept { return sites_; }
  const std::string& label() const noexcept { return label_; }
  const std::optional<Envelope>& envelope() const noexcept { return envelope_; }
  const std::optional<MonotoneSites>& monotone_sites() const noexcept { return monotone_; }

  Functional with_envelope(std::optional<Envelope> envelope) const;
  Functional with_monotone_sites(std::optional<MonotoneSites> monotone) const;
  Functional with_label(std::string label) const;

private:
  std::size_t sites_;
  std::shared_ptr<const Body> body_;
  std::string label_;
  std::optional<Envelope> envelope_;
  std::optional<MonotoneSites> monotone_;
};

/// A functional carrying an extra site argument, h(mu, y). Used as a
/// Skorohod integrand and as the Mecke test function.
class SiteFunctional {
public:
  using Body = std::function<double(std::span<const int>, std::size_t)>;

  SiteFunctional(std::size_t sites, Body body, std::string label = {});

  double operator()(std::span<const int> counts, std::size_t site) const;

  std::size_t sites() const noexcept { return sites_; }
  const std::string& label() const noexcept { return label_; }
  /// |h(n, y)| <= scale * prod_i (1 + n_i)^power for every y.
  const std::optional<Envelope>& envelope() const noexcept { return envelope_; }
  SiteFunctional with_envelope(std::optional<Envelope> envelope) const;

  /// The y-section mu -> h(mu, y).
  Functional section(std::size_t site) const;

private:
  std::size_t sites_;
  std::shared_ptr<const Body> body_;
  std::string label_;
  std::optional<Envelope> envelope_;
};

/// Add-one cost: mu -> f(mu + delta_site) - f(mu).
Functional difference(const Functional& f, std::size_t site);

/// D^n_{y_1..y_n} f by the explicit subset sum
///   sum_{J subset [n]} (-1)^{n-|J|} f(mu + sum_{j in J} delta_{y_j}).
/// The empty site list returns f itself.
Functional iterated_difference(const Functional& f, std::span<const std::size_t> sites);
Functional iterated_difference(const Functional& f, std::initializer_list<std::size_t> sites);

/// Pointwise evaluation of the subset sum above, without building a Functional.
double iterated_difference_at(const Functional& f, std::span<const std::size_t> sites,
                              std::span<const int> at);

/// Expands a multiplicity profile m into a site list (m_0 copies of 0, m_1 copies of 1, ...).
std::vector<std::size_t> sites_of(std::span<const int> multiplicity);

/// mu -> f(mu + offset)
Functional shifted(const Functional& f, std::span<const int> offset);
/// mu -> f(mu) * g(mu)
Functional product(const Functional& f, const Functional& g);
/// mu -> f(mu) - c
Functional centered(const Functional& f, double c);

namespace catalog {

Functional constant(std::size_t sites, double value);
/// eta(B)^degree with B given as a site list; degree >= 1.
Functional count_power(std::size_t sites, std::vector<std::size_t> block, int degree);
Functional linear_count(std::size_t sites, std::vector<std::size_t> block);
Functional quadratic_count(std::size_t sites, std::vector<std::size_t> block);
/// exp(-sum_i v_i n_i), v_i >= 0.
Functional exponential(std::vector<double> v);
/// 1{eta(B) >= threshold}
Functional threshold_indicator(std::size_t sites, std::vector<std::size_t> block, int threshold);
/// max_i n_i
Functional max_occupancy(std::size_t sites);

}  // namespace catalog

}  // namespace poisfock
