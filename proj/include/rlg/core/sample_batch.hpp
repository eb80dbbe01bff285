#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rlg/core/point.hpp"

namespace rlg {

// n points stored row-major (n x dim), plus a tally of draws rejected for
// leaving the finite domain.
struct SampleBatch {
  int dim = 1;
  std::vector<double> values;
  std::size_t rejected = 0;

  std::size_t size() const noexcept { return values.size() / static_cast<std::size_t>(dim); }
  bool empty() const noexcept { return values.empty(); }
  Point at(std::size_t i) const {
    return Point::from(std::span<const double>(values).subspan(i * static_cast<std::size_t>(dim),
                                                               static_cast<std::size_t>(dim)));
  }
  void push_back(const Point& p) {
    if (p.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "SampleBatch::push_back");
    values.insert(values.end(), p.coords().begin(), p.coords().end());
  }
};

}  // namespace rlg
