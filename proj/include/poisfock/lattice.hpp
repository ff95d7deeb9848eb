#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace poisfock {

/// The box {0..caps_0} x ... x {0..caps_{k-1}} of count vectors.
class Box {
public:
  explicit Box(std::vector<int> caps);

  const std::vector<int>& caps() const noexcept { return caps_; }
  std::size_t sites() const noexcept { return caps_.size(); }
  std::size_t size() const noexcept { return size_; }

  /// Visits every point in odometer order (site 0 fastest).
  template <class Fn>
  void for_each(Fn&& fn) const {
    std::vector<int> n(caps_.size(), 0);
    for (std::size_t visited = 0; visited < size_; ++visited) {
      fn(std::span<const int>(n));
      for (std::size_t i = 0; i < n.size(); ++i) {
        if (n[i] < caps_[i]) {
          ++n[i];
          break;
        }
        n[i] = 0;
      }
    }
  }

  /// Row-major (site 0 fastest) index of a point inside the box.
  std::size_t index_of(std::span<const int> n) const;

private:
  std::vector<int> caps_;
  std::size_t size_ = 1;
};

std::string format_counts(std::span<const int> n);

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
  void add(double x) noexcept;
  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace poisfock
