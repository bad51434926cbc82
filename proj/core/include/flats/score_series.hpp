#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace flats {

/// Per-sample OOD scores. Orientation is fixed: higher means more OOD.
class ScoreSeries {
 public:
  ScoreSeries() = default;
  /// Throws NonFinite naming the first offending index.
  explicit ScoreSeries(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const ScoreSeries&, const ScoreSeries&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace flats
