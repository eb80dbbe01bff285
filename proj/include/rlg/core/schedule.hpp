#pragma once

#include <string_view>

#include "rlg/core/point.hpp"

namespace rlg {

enum class ScheduleKind { RectifiedLinear, VariancePreserving };

std::string_view to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(std::string_view name);

// Affine map between velocity and score at one time: v = drift_coef * x + score_coef * s.
struct VelocityScoreMap {
  double drift_coef;  // alpha_dot / alpha
  double score_coef;  // beta * (alpha_dot / alpha * beta - beta_dot)
};

// Interpolation path x_t = alpha(t) x0 + beta(t) x1 with data at t=0 and noise at t=1.
class Schedule {
 public:
  static constexpr double kDefaultEpsClamp = 1e-3;

  explicit Schedule(ScheduleKind kind = ScheduleKind::RectifiedLinear, double eps_clamp = kDefaultEpsClamp);

  ScheduleKind kind() const noexcept { return kind_; }
  double eps_clamp() const noexcept { return eps_; }

  double alpha(double t) const;
  double beta(double t) const;
  double alpha_dot(double t) const;
  double beta_dot(double t) const;

  double clamp_time(double t) const noexcept;

  // Coefficients of the velocity/score relation at clamp_time(t).
  VelocityScoreMap velocity_score_map(double t) const;

 private:
  ScheduleKind kind_;
  double eps_;
};

Point interpolate(const Point& x0, const Point& x1, double t, const Schedule& sched);
Point target_velocity(const Point& x0, const Point& x1, double t, const Schedule& sched);
Point velocity_to_score(const Point& v, const Point& x, double t, const Schedule& sched);
Point score_to_velocity(const Point& s, const Point& x, double t, const Schedule& sched);

}  // namespace rlg
