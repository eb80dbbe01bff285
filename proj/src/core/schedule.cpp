#include "rlg/core/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace rlg {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kSingularTol = 1e-12;

void check_time(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "time must lie in [0,1], got " + std::to_string(t));
}

}  // namespace

std::string_view to_string(ScheduleKind kind) {
  return kind == ScheduleKind::RectifiedLinear ? "rectified-linear" : "variance-preserving";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "rectified-linear") return ScheduleKind::RectifiedLinear;
  if (name == "variance-preserving") return ScheduleKind::VariancePreserving;
  throw Error(ErrorCode::Parse, "unknown schedule kind '" + std::string(name) + "'");
}

Schedule::Schedule(ScheduleKind kind, double eps_clamp) : kind_(kind), eps_(eps_clamp) {
  if (!(eps_clamp > 0.0 && eps_clamp < 0.1))
    throw Error(ErrorCode::InvalidArgument, "eps_clamp must lie in (0, 0.1)");
}

double Schedule::alpha(double t) const {
  return kind_ == ScheduleKind::RectifiedLinear ? 1.0 - t : std::cos(kHalfPi * t);
}

double Schedule::beta(double t) const {
  return kind_ == ScheduleKind::RectifiedLinear ? t : std::sin(kHalfPi * t);
}

double Schedule::alpha_dot(double t) const {
  return kind_ == ScheduleKind::RectifiedLinear ? -1.0 : -kHalfPi * std::sin(kHalfPi * t);
}

double Schedule::beta_dot(double t) const {
  return kind_ == ScheduleKind::RectifiedLinear ? 1.0 : kHalfPi * std::cos(kHalfPi * t);
}

double Schedule::clamp_time(double t) const noexcept { return std::clamp(t, eps_, 1.0 - eps_); }

VelocityScoreMap Schedule::velocity_score_map(double t) const {
  const double tc = clamp_time(t);
  const double a = alpha(tc);
  const double b = beta(tc);
  const double ratio = alpha_dot(tc) / a;
  const double score_coef = b * (ratio * b - beta_dot(tc));
  if (!(std::abs(score_coef) >= kSingularTol))
    throw Error(ErrorCode::SingularSchedule, "velocity/score coefficient vanishes at t=" + std::to_string(tc));
  return {ratio, score_coef};
}

Point interpolate(const Point& x0, const Point& x1, double t, const Schedule& sched) {
  require_same_dim(x0, x1, "interpolate endpoints");
  check_time(t);
  return lincomb(sched.beta(t), x1, sched.alpha(t), x0);
}

Point target_velocity(const Point& x0, const Point& x1, double t, const Schedule& sched) {
  require_same_dim(x0, x1, "target_velocity endpoints");
  check_time(t);
  return lincomb(sched.beta_dot(t), x1, sched.alpha_dot(t), x0);
}

Point velocity_to_score(const Point& v, const Point& x, double t, const Schedule& sched) {
  require_same_dim(v, x, "velocity_to_score operands");
  const auto m = sched.velocity_score_map(t);
  Point s(v.dim());
  for (int i = 0; i < v.dim(); ++i) s[i] = (v[i] - m.drift_coef * x[i]) / m.score_coef;
  return s;
}

Point score_to_velocity(const Point& s, const Point& x, double t, const Schedule& sched) {
  require_same_dim(s, x, "score_to_velocity operands");
  const auto m = sched.velocity_score_map(t);
  Point v(s.dim());
  for (int i = 0; i < s.dim(); ++i) v[i] = m.drift_coef * x[i] + m.score_coef * s[i];
  return v;
}

}  // namespace rlg
