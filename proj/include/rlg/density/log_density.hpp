#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rlg/core/point.hpp"
#include "rlg/core/schedule.hpp"
#include "rlg/net/mlp.hpp"

namespace rlg {

struct LogDensityOptions {
  std::size_t steps = 200;     // RK4 steps over [t_start, 1]; at least 100
  double t_start = 0.0;        // marginal time whose density is returned
  double escape_radius = 50.0;
};

// Batched vector field: v (n x dim) and div v (n) at time t.
using DivergenceField =
    std::function<void(std::span<const double> xs, double t, std::vector<double>& v, std::vector<double>& div)>;

// Same integration for an arbitrary field.
std::vector<double> field_log_density(int dim, const DivergenceField& field, std::span<const double> xs,
                                      const LogDensityOptions& opts = {});

// log p_{model, t_start}(x) by the instantaneous change of variables along the
// probability-flow ODE: integrate (x, l)' = (v, div v) from t_start to 1 with
// RK4, then add the standard-normal log-density of the endpoint. The noise
// endpoint is N(0, I) for every supported schedule. xs is n x dim.
std::vector<double> model_log_density(const VelocityModel& model, std::span<const double> xs, const Schedule& sched,
                                      const LogDensityOptions& opts = {});
double model_log_density(const VelocityModel& model, const Point& x, const Schedule& sched, std::size_t steps = 200);

// As above, and adds sum_s weights[s] * d(log p(x_s))/d(theta) into grads by
// reverse-mode differentiation through the discretized RK4 solve.
std::vector<double> model_log_density_with_grad(const VelocityModel& model, std::span<const double> xs,
                                                const Schedule& sched, const LogDensityOptions& opts,
                                                std::span<const double> weights, std::span<double> grads);

// beta * (log p_{theta,t}(x) - log p_{ref,t}(x)).
double implicit_reward(const VelocityModel& theta, const VelocityModel& ref, const Point& x, double t, double beta,
                       const Schedule& sched, std::size_t steps = 200);
std::vector<double> implicit_reward(const VelocityModel& theta, const VelocityModel& ref, std::span<const double> xs,
                                    double t, double beta, const Schedule& sched, std::size_t steps = 200);

// Interpolation path of x0 ~ N(mean, diag(variance)) with x1 ~ N(0, I):
// every marginal is Gaussian and the velocity is affine in x.
class GaussianPath {
 public:
  GaussianPath(Point mean, Point variance, Schedule sched);

  int dim() const noexcept { return mean_.dim(); }
  double marginal_variance(int i, double t) const;
  Point velocity(const Point& x, double t) const;
  double divergence(double t) const;
  Point score(const Point& x, double t) const;
  double log_pdf(const Point& x, double t) const;

  // DivergenceField interface.
  void operator()(std::span<const double> xs, double t, std::vector<double>& v, std::vector<double>& div) const;

 private:
  Point mean_, var_;
  Schedule sched_;
};

}  // namespace rlg
