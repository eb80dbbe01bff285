#include "rlg/density/tilt.hpp"

#include <algorithm>
#include <cmath>

#include "rlg/error.hpp"

namespace rlg {

GaussianMixture tilt_mixture(const GaussianMixture& m, const Point& lambda) {
  if (lambda.dim() != m.dim()) throw Error(ErrorCode::DimensionMismatch, "tilt_mixture: lambda dimension");
  if (!lambda.finite()) throw Error(ErrorCode::NonFinite, "tilt_mixture: lambda");
  std::vector<GaussianComponent> out;
  std::vector<double> logw;
  double hi = -INFINITY;
  for (const auto& c : m.components()) {
    GaussianComponent t = c;
    double lw = std::log(c.weight);
    for (int i = 0; i < m.dim(); ++i) {
      t.mean[i] = c.mean[i] + c.variance[i] * lambda[i];
      lw += lambda[i] * c.mean[i] + 0.5 * lambda[i] * c.variance[i] * lambda[i];
    }
    out.push_back(t);
    logw.push_back(lw);
    hi = std::max(hi, lw);
  }
  double norm = 0.0;
  for (double& l : logw) norm += (l = std::exp(l - hi));
  double total = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) total += (out[k].weight = logw[k] / norm);
  // Fold the rounding residue into the largest weight so the sum is 1 to the last ulp or two.
  auto largest = std::max_element(out.begin(), out.end(), [](auto& a, auto& b) { return a.weight < b.weight; });
  largest->weight += 1.0 - total;
  return GaussianMixture(std::move(out));
}

GaussianMixture tilt_mixture(const GaussianMixture& m, const RewardFn& reward, double beta_eff) {
  if (reward.kind() != RewardKind::Linear)
    throw Error(ErrorCode::UnsupportedReward, "closed-form tilt needs a linear reward; use quadrature_tilt");
  if (!(beta_eff > 0.0)) throw Error(ErrorCode::InvalidArgument, "tilt_mixture: beta_eff must be positive");
  return tilt_mixture(m, (1.0 / beta_eff) * reward.linear_coef());
}

TabulatedDensity::TabulatedDensity(std::vector<double> xs, std::vector<double> density)
    : xs_(std::move(xs)), density_(std::move(density)) {
  if (xs_.size() < 2 || xs_.size() != density_.size())
    throw Error(ErrorCode::InvalidArgument, "tabulated density needs >= 2 matching points");
  cum_.assign(xs_.size(), 0.0);
  for (std::size_t i = 1; i < xs_.size(); ++i) {
    if (!(xs_[i] > xs_[i - 1])) throw Error(ErrorCode::InvalidArgument, "tabulated grid must increase");
    cum_[i] = cum_[i - 1] + 0.5 * (density_[i] + density_[i - 1]) * (xs_[i] - xs_[i - 1]);
  }
}

double TabulatedDensity::pdf(double x) const {
  if (x < xs_.front() || x > xs_.back()) return 0.0;
  const auto hi = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin()), 1, xs_.size() - 1);
  const double f = (x - xs_[hi - 1]) / (xs_[hi] - xs_[hi - 1]);
  return density_[hi - 1] + f * (density_[hi] - density_[hi - 1]);
}

double TabulatedDensity::cdf(double x) const {
  if (x <= xs_.front()) return 0.0;
  if (x >= xs_.back()) return cum_.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin());
  const double dx = x - xs_[hi - 1];
  // Exact integral of the linear interpolant over [x_{hi-1}, x].
  return cum_[hi - 1] + 0.5 * (density_[hi - 1] + pdf(x)) * dx;
}

TabulatedDensity quadrature_tilt(const GaussianMixture& m, const RewardFn& reward, double beta_eff,
                                 const Grid1D& grid) {
  if (m.dim() != 1 || reward.dim() != 1) throw Error(ErrorCode::Unsupported, "quadrature_tilt is 1-D only");
  if (!(beta_eff > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadrature_tilt: beta_eff must be positive");
  if (grid.points < 4096 || grid.lo > -10.0 || grid.hi < 10.0)
    throw Error(ErrorCode::InvalidArgument, "quadrature grid must cover [-10, 10] with >= 4096 points");

  std::vector<double> xs(grid.points), logq(grid.points);
  double hi = -INFINITY;
  for (std::size_t i = 0; i < grid.points; ++i) {
    xs[i] = grid.at(i);
    const Point x{xs[i]};
    logq[i] = m.log_pdf(x) + reward(x) / beta_eff;
    if (std::isnan(logq[i])) throw Error(ErrorCode::DivergentTilt, "tilted log-density is NaN");
    hi = std::max(hi, logq[i]);
  }
  if (!std::isfinite(hi)) throw Error(ErrorCode::DivergentTilt, "tilted density is not finite on the grid");
  std::vector<double> q(grid.points);
  double z = 0.0;
  for (std::size_t i = 0; i < grid.points; ++i) q[i] = std::exp(logq[i] - hi);
  for (std::size_t i = 1; i < grid.points; ++i) z += 0.5 * (q[i] + q[i - 1]) * (xs[i] - xs[i - 1]);
  const double log_z = hi + std::log(z);
  if (!std::isfinite(log_z) || !(z > 0.0)) throw Error(ErrorCode::DivergentTilt, "normalization constant");
  for (double& v : q) v /= z;
  return TabulatedDensity(std::move(xs), std::move(q));
}

double total_variation(const TabulatedDensity& table, const GaussianMixture& m) {
  const auto& xs = table.xs();
  const auto& p = table.density();
  double acc = 0.0;
  double prev = std::abs(p[0] - m.pdf(Point{xs[0]}));
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double cur = std::abs(p[i] - m.pdf(Point{xs[i]}));
    acc += 0.5 * (cur + prev) * (xs[i] - xs[i - 1]);
    prev = cur;
  }
  return 0.5 * acc;
}

}  // namespace rlg
