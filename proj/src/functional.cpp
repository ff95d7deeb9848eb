#include "poisfock/functional.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "poisfock/errors.hpp"

namespace poisfock {

Counts::Counts(std::vector<int> occupations) : n_(std::move(occupations)) {
  for (int v : n_) {
    if (v < 0) throw DomainError("occupation numbers must be nonnegative");
  }
}

Counts::Counts(std::initializer_list<int> occupations) : Counts(std::vector<int>(occupations)) {}

int Counts::total() const noexcept { return std::accumulate(n_.begin(), n_.end(), 0); }

Counts Counts::plus(std::size_t site, int times) const {
  std::vector<int> n(n_);
  n.at(site) += times;
  return Counts(std::move(n));
}

Counts Counts::minus(std::size_t site, int times) const {
  std::vector<int> n(n_);
  if (n.at(site) < times) throw DomainError("cannot remove a point that is not there");
  n[site] -= times;
  return Counts(std::move(n));
}

Envelope Envelope::shifted(std::span<const int> offset) const {
  // (1 + n + i) <= (1 + i)(1 + n) for n, i >= 0
  double s = scale;
  for (int i : offset) s *= std::pow(1.0 + i, power);
  return {s, power};
}

Envelope envelope_product(const Envelope& a, const Envelope& b) {
  return {a.scale * b.scale, a.power + b.power};
}

Envelope envelope_sum(const Envelope& a, const Envelope& b) {
  return {a.scale + b.scale, std::max(a.power, b.power)};
}

Envelope envelope_difference(const Envelope& e, std::span<const int> multiplicity) {
  const int order = std::accumulate(multiplicity.begin(), multiplicity.end(), 0);
  Envelope out = e.shifted(multiplicity);
  out.scale *= std::ldexp(1.0, order);
  return out;
}

Functional::Functional(std::size_t sites, Body body, std::string label)
    : sites_(sites), body_(std::make_shared<const Body>(std::move(body))), label_(std::move(label)) {
  if (sites_ == 0) throw DomainError("functional needs at least one site");
}

double Functional::operator()(std::span<const int> counts) const {
  if (counts.size() != sites_) {
    throw DomainError("functional '" + label_ + "' expects " + std::to_string(sites_) +
                      " sites, got " + std::to_string(counts.size()));
  }
  return (*body_)(counts);
}

double Functional::operator()(std::initializer_list<int> counts) const {
  return (*this)(std::span<const int>(counts.begin(), counts.size()));
}

Functional Functional::with_envelope(std::optional<Envelope> envelope) const {
  Functional f(*this);
  f.envelope_ = envelope;
  return f;
}

Functional Functional::with_monotone_sites(std::optional<MonotoneSites> monotone) const {
  if (monotone && monotone->increasing.size() != sites_) {
    throw DomainError("monotone partition has the wrong number of sites");
  }
  Functional f(*this);
  f.monotone_ = std::move(monotone);
  return f;
}

Functional Functional::with_label(std::string label) const {
  Functional f(*this);
  f.label_ = std::move(label);
  return f;
}

SiteFunctional::SiteFunctional(std::size_t sites, Body body, std::string label)
    : sites_(sites), body_(std::make_shared<const Body>(std::move(body))), label_(std::move(label)) {
  if (sites_ == 0) throw DomainError("functional needs at least one site");
}

double SiteFunctional::operator()(std::span<const int> counts, std::size_t site) const {
  if (counts.size() != sites_ || site >= sites_) {
    throw DomainError("site functional '" + label_ + "' called with mismatched arguments");
  }
  return (*body_)(counts, site);
}

SiteFunctional SiteFunctional::with_envelope(std::optional<Envelope> envelope) const {
  SiteFunctional h(*this);
  h.envelope_ = envelope;
  return h;
}

Functional SiteFunctional::section(std::size_t site) const {
  if (site >= sites_) throw DomainError("section site out of range");
  auto body = body_;
  Functional f(
      sites_, [body, site](std::span<const int> n) { return (*body)(n, site); },
      label_ + "(.," + std::to_string(site + 1) + ")");
  return f.with_envelope(envelope_);
}

namespace {

void check_site(const Functional& f, std::size_t site) {
  if (site >= f.sites()) {
    throw DomainError("site " + std::to_string(site) + " out of range for a functional on " +
                      std::to_string(f.sites()) + " sites");
  }
}

std::vector<int> multiplicity_of(std::span<const std::size_t> sites, std::size_t k) {
  std::vector<int> m(k, 0);
  for (std::size_t y : sites) ++m[y];
  return m;
}

}  // namespace

double iterated_difference_at(const Functional& f, std::span<const std::size_t> sites,
                              std::span<const int> at) {
  const std::size_t n = sites.size();
  if (n == 0) return f(at);
  std::vector<int> buf(at.begin(), at.end());
  double total = 0.0;
  const std::size_t subsets = std::size_t{1} << n;
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::copy(at.begin(), at.end(), buf.begin());
    int size = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (mask & (std::size_t{1} << j)) {
        ++buf[sites[j]];
        ++size;
      }
    }
    const double v = f(buf);
    total += ((n - size) % 2 == 0) ? v : -v;
  }
  return total;
}

Functional difference(const Functional& f, std::size_t site) {
  const std::size_t sites[] = {site};
  return iterated_difference(f, std::span<const std::size_t>(sites));
}

Functional iterated_difference(const Functional& f, std::span<const std::size_t> sites) {
  for (std::size_t y : sites) check_site(f, y);
  if (sites.empty()) return f;
  std::vector<std::size_t> ys(sites.begin(), sites.end());
  std::string label = "D^" + std::to_string(ys.size()) + "[";
  for (std::size_t j = 0; j < ys.size(); ++j) label += (j ? "," : "") + std::to_string(ys[j] + 1);
  label += "] " + f.label();
  Functional out(
      f.sites(), [f, ys](std::span<const int> n) { return iterated_difference_at(f, ys, n); },
      std::move(label));
  std::optional<Envelope> env;
  if (f.envelope()) env = envelope_difference(*f.envelope(), multiplicity_of(ys, f.sites()));
  return out.with_envelope(env);
}

Functional iterated_difference(const Functional& f, std::initializer_list<std::size_t> sites) {
  return iterated_difference(f, std::span<const std::size_t>(sites.begin(), sites.size()));
}

std::vector<std::size_t> sites_of(std::span<const int> multiplicity) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < multiplicity.size(); ++i) {
    for (int r = 0; r < multiplicity[i]; ++r) out.push_back(i);
  }
  return out;
}

Functional shifted(const Functional& f, std::span<const int> offset) {
  if (offset.size() != f.sites()) throw DomainError("shift has the wrong number of sites");
  std::vector<int> off(offset.begin(), offset.end());
  Functional out(
      f.sites(),
      [f, off](std::span<const int> n) {
        std::vector<int> buf(n.begin(), n.end());
        for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += off[i];
        return f(buf);
      },
      f.label());
  std::optional<Envelope> env;
  if (f.envelope()) env = f.envelope()->shifted(off);
  return out.with_envelope(env);
}

Functional product(const Functional& f, const Functional& g) {
  if (f.sites() != g.sites()) throw DomainError("product of functionals on different spaces");
  Functional out(
      f.sites(), [f, g](std::span<const int> n) { return f(n) * g(n); },
      "(" + f.label() + ")*(" + g.label() + ")");
  std::optional<Envelope> env;
  if (f.envelope() && g.envelope()) env = envelope_product(*f.envelope(), *g.envelope());
  return out.with_envelope(env);
}

Functional centered(const Functional& f, double c) {
  Functional out(
      f.sites(), [f, c](std::span<const int> n) { return f(n) - c; }, f.label());
  std::optional<Envelope> env;
  if (f.envelope()) env = envelope_sum(*f.envelope(), Envelope{std::abs(c), 0.0});
  return out.with_envelope(env);
}

namespace catalog {

namespace {

std::string block_label(const std::vector<std::size_t>& block) {
  std::string s = "{";
  for (std::size_t j = 0; j < block.size(); ++j) s += (j ? "," : "") + std::to_string(block[j] + 1);
  return s + "}";
}

void check_block(std::size_t sites, const std::vector<std::size_t>& block) {
  if (block.empty()) throw DomainError("block must contain at least one site");
  for (std::size_t y : block) {
    if (y >= sites) throw DomainError("block site out of range");
  }
}

MonotoneSites all_increasing(std::size_t k) { return {std::vector<bool>(k, true)}; }

}  // namespace

Functional constant(std::size_t sites, double value) {
  return Functional(
             sites, [value](std::span<const int>) { return value; }, "const")
      .with_envelope(Envelope{std::abs(value), 0.0})
      .with_monotone_sites(all_increasing(sites));
}

Functional count_power(std::size_t sites, std::vector<std::size_t> block, int degree) {
  check_block(sites, block);
  if (degree < 1) throw DomainError("count_power degree must be >= 1");
  std::string label = "eta" + block_label(block) + "^" + std::to_string(degree);
  return Functional(
             sites,
             [block, degree](std::span<const int> n) {
               double c = 0.0;
               for (std::size_t y : block) c += n[y];
               double v = 1.0;
               for (int d = 0; d < degree; ++d) v *= c;
               return v;
             },
             std::move(label))
      // eta(B) <= prod_i (1 + n_i)
      .with_envelope(Envelope{1.0, static_cast<double>(degree)})
      .with_monotone_sites(all_increasing(sites));
}

Functional linear_count(std::size_t sites, std::vector<std::size_t> block) {
  return count_power(sites, std::move(block), 1);
}

Functional quadratic_count(std::size_t sites, std::vector<std::size_t> block) {
  return count_power(sites, std::move(block), 2);
}

Functional exponential(std::vector<double> v) {
  for (double x : v) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("exponential weights must be >= 0");
  }
  const std::size_t k = v.size();
  return Functional(
             k,
             [v](std::span<const int> n) {
               double s = 0.0;
               for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * n[i];
               return std::exp(-s);
             },
             "exp(-eta(v))")
      .with_envelope(Envelope{1.0, 0.0})
      .with_monotone_sites(MonotoneSites{std::vector<bool>(k, false)});
}

Functional threshold_indicator(std::size_t sites, std::vector<std::size_t> block, int threshold) {
  check_block(sites, block);
  std::string label = "1{eta" + block_label(block) + ">=" + std::to_string(threshold) + "}";
  return Functional(
             sites,
             [block, threshold](std::span<const int> n) {
               int c = 0;
               for (std::size_t y : block) c += n[y];
               return c >= threshold ? 1.0 : 0.0;
             },
             std::move(label))
      .with_envelope(Envelope{1.0, 0.0})
      .with_monotone_sites(all_increasing(sites));
}

Functional max_occupancy(std::size_t sites) {
  return Functional(
             sites,
             [](std::span<const int> n) {
               return static_cast<double>(*std::max_element(n.begin(), n.end()));
             },
             "max_i n_i")
      .with_envelope(Envelope{1.0, 1.0})
      .with_monotone_sites(all_increasing(sites));
}

}  // namespace catalog

}  // namespace poisfock
