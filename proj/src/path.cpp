#include "poisfock/path.hpp"

#include "poisfock/errors.hpp"

namespace poisfock {

PathConfiguration PathConfiguration::from_points(std::size_t sites, const std::vector<std::size_t>& points) {
  std::vector<int> n(sites, 0);
  for (std::size_t y : points) {
    if (y >= sites) throw DomainError("point site out of range");
    ++n[y];
  }
  return PathConfiguration(Counts(std::move(n)));
}

std::vector<std::size_t> PathConfiguration::points() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < counts_.sites(); ++i) {
    for (int r = 0; r < counts_[i]; ++r) out.push_back(i);
  }
  return out;
}

}  // namespace poisfock
