#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace hardyop {

struct Interval {
  double lo;
  double hi;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x > lo && x < hi; }
  bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }
};

/// Finite union of disjoint open intervals, kept sorted. Total length is cached.
class IntervalSet {
 public:
  IntervalSet() = default;

  explicit IntervalSet(std::vector<Interval> pieces) {
    std::erase_if(pieces, [](const Interval& iv) { return !(iv.hi > iv.lo); });
    std::sort(pieces.begin(), pieces.end(),
              [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    for (const auto& iv : pieces) {
      if (!pieces_.empty() && iv.lo <= pieces_.back().hi)
        pieces_.back().hi = std::max(pieces_.back().hi, iv.hi);
      else
        pieces_.push_back(iv);
    }
    for (const auto& iv : pieces_) total_ += iv.length();
  }

  const std::vector<Interval>& intervals() const { return pieces_; }
  double total_length() const { return total_; }
  bool empty() const { return pieces_.empty(); }

  bool contains(double x) const {
    return std::any_of(pieces_.begin(), pieces_.end(),
                       [x](const Interval& iv) { return iv.contains(x); });
  }

  IntervalSet unite(const IntervalSet& other) const {
    std::vector<Interval> all = pieces_;
    all.insert(all.end(), other.pieces_.begin(), other.pieces_.end());
    return IntervalSet(std::move(all));
  }

 private:
  std::vector<Interval> pieces_;
  double total_ = 0.0;
};

}  // namespace hardyop
