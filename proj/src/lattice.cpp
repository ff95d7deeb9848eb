#include "poisfock/lattice.hpp"

#include <cmath>

#include "poisfock/errors.hpp"

namespace poisfock {

Box::Box(std::vector<int> caps) : caps_(std::move(caps)) {
  for (int c : caps_) {
    if (c < 0) throw DomainError("box caps must be nonnegative");
    size_ *= static_cast<std::size_t>(c) + 1;
  }
}

std::size_t Box::index_of(std::span<const int> n) const {
  std::size_t idx = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < caps_.size(); ++i) {
    idx += static_cast<std::size_t>(n[i]) * stride;
    stride *= static_cast<std::size_t>(caps_[i]) + 1;
  }
  return idx;
}

std::string format_counts(std::span<const int> n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s + ")";
}

void CompensatedSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

}  // namespace poisfock
