#pragma once

#include <cstddef>
#include <vector>

#include "rlg/density/mixture.hpp"
#include "rlg/density/reward.hpp"

namespace rlg {

// Exponential tilt p(x) exp(<lambda, x>) of a Gaussian mixture, in closed form:
// each component mean moves by Sigma_k lambda and its weight is multiplied by
// exp(<lambda, mu_k> + lambda^T Sigma_k lambda / 2) before renormalization.
GaussianMixture tilt_mixture(const GaussianMixture& m, const Point& lambda);

// Optimal KL-regularized policy for a linear reward: tilt by reward.coef / beta_eff.
// Throws UnsupportedReward for any other reward kind.
GaussianMixture tilt_mixture(const GaussianMixture& m, const RewardFn& reward, double beta_eff);

struct Grid1D {
  double lo = -10.0;
  double hi = 10.0;
  std::size_t points = 4096;

  double step() const noexcept { return (hi - lo) / static_cast<double>(points - 1); }
  double at(std::size_t i) const noexcept { return lo + step() * static_cast<double>(i); }
};

// Piecewise-linear density on a uniform grid, zero outside.
class TabulatedDensity {
 public:
  TabulatedDensity(std::vector<double> xs, std::vector<double> density);

  const std::vector<double>& xs() const noexcept { return xs_; }
  const std::vector<double>& density() const noexcept { return density_; }

  double pdf(double x) const;
  double cdf(double x) const;
  double mass(double lo, double hi) const { return cdf(hi) - cdf(lo); }

 private:
  std::vector<double> xs_, density_, cum_;
};

// Brute-force tilt p(x) exp(R(x) / beta_eff), normalized by the trapezoid rule.
// The grid must cover [-10, 10] with at least 4096 points; 1-D only.
TabulatedDensity quadrature_tilt(const GaussianMixture& m, const RewardFn& reward, double beta_eff,
                                 const Grid1D& grid = {});

// 0.5 * integral |p - q| over the table's grid (trapezoid).
double total_variation(const TabulatedDensity& table, const GaussianMixture& m);

}  // namespace rlg
