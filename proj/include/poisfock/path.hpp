#pragma once

#include <cstddef>
#include <vector>

#include "poisfock/functional.hpp"

namespace poisfock {

/// A realized configuration of the process: a multiset of sites, equivalently its counts.
class PathConfiguration {
public:
  PathConfiguration() = default;
  explicit PathConfiguration(Counts counts) : counts_(std::move(counts)) {}
  static PathConfiguration from_points(std::size_t sites, const std::vector<std::size_t>& points);

  const Counts& counts() const noexcept { return counts_; }
  std::size_t sites() const noexcept { return counts_.sites(); }
  /// Number of points, mu(Y).
  int size() const noexcept { return counts_.total(); }
  /// Points listed by site in ascending order, with multiplicity.
  std::vector<std::size_t> points() const;

  friend bool operator==(const PathConfiguration&, const PathConfiguration&) = default;

private:
  Counts counts_;
};

}  // namespace poisfock
