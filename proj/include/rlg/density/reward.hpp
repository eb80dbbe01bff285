#pragma once

#include <string_view>
#include <vector>

#include "rlg/core/point.hpp"

namespace rlg {

enum class RewardKind { Linear, Quadratic, CustomTable };

std::string_view to_string(RewardKind kind);

// Terminal reward R(x).
//   linear:       R(x) = <coef, x>
//   quadratic:    R(x) = <coef, x> + sum_i curvature_i * x_i^2
//   custom-table: 1-D values on an increasing grid, linearly interpolated,
//                 held constant beyond the ends.
class RewardFn {
 public:
  static RewardFn linear(Point coef);
  static RewardFn quadratic(Point coef, Point curvature);
  static RewardFn table(std::vector<double> xs, std::vector<double> values);

  RewardKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return coef_.dim(); }
  const Point& linear_coef() const noexcept { return coef_; }

  double operator()(const Point& x) const;
  Point gradient(const Point& x) const;

 private:
  RewardKind kind_ = RewardKind::Linear;
  Point coef_;
  Point curvature_;
  std::vector<double> xs_, values_;
};

}  // namespace rlg
