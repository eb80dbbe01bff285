#include "rlg/density/reward.hpp"

#include <algorithm>
#include <cmath>

#include "rlg/error.hpp"

namespace rlg {

std::string_view to_string(RewardKind kind) {
  switch (kind) {
    case RewardKind::Linear: return "linear";
    case RewardKind::Quadratic: return "quadratic";
    case RewardKind::CustomTable: return "custom-table";
  }
  return "unknown";
}

RewardFn RewardFn::linear(Point coef) {
  if (!coef.finite()) throw Error(ErrorCode::NonFinite, "linear reward coefficient");
  RewardFn r;
  r.kind_ = RewardKind::Linear;
  r.coef_ = coef;
  r.curvature_ = Point(coef.dim());
  return r;
}

RewardFn RewardFn::quadratic(Point coef, Point curvature) {
  require_same_dim(coef, curvature, "quadratic reward coefficients");
  if (!coef.finite() || !curvature.finite()) throw Error(ErrorCode::NonFinite, "quadratic reward coefficient");
  RewardFn r = linear(coef);
  r.kind_ = RewardKind::Quadratic;
  r.curvature_ = curvature;
  return r;
}

RewardFn RewardFn::table(std::vector<double> xs, std::vector<double> values) {
  if (xs.size() < 2 || xs.size() != values.size())
    throw Error(ErrorCode::InvalidArgument, "reward table needs >= 2 matching grid points");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw Error(ErrorCode::InvalidArgument, "reward table grid must increase");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "reward table value");
  RewardFn r;
  r.kind_ = RewardKind::CustomTable;
  r.coef_ = Point(1);
  r.curvature_ = Point(1);
  r.xs_ = std::move(xs);
  r.values_ = std::move(values);
  return r;
}

double RewardFn::operator()(const Point& x) const {
  if (x.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "reward evaluation");
  if (kind_ == RewardKind::CustomTable) {
    const double v = x[0];
    if (v <= xs_.front()) return values_.front();
    if (v >= xs_.back()) return values_.back();
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), v) - xs_.begin());
    const double f = (v - xs_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
    return values_[hi - 1] + f * (values_[hi] - values_[hi - 1]);
  }
  double acc = 0.0;
  for (int i = 0; i < x.dim(); ++i) acc += coef_[i] * x[i] + curvature_[i] * x[i] * x[i];
  return acc;
}

Point RewardFn::gradient(const Point& x) const {
  if (x.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "reward gradient");
  Point g(x.dim());
  if (kind_ == RewardKind::CustomTable) {
    const double v = x[0];
    if (v <= xs_.front() || v >= xs_.back()) return g;
    const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), v) - xs_.begin());
    g[0] = (values_[hi] - values_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
    return g;
  }
  for (int i = 0; i < x.dim(); ++i) g[i] = coef_[i] + 2.0 * curvature_[i] * x[i];
  return g;
}

}  // namespace rlg
