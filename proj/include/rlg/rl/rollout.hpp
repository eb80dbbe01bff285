#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlg/core/point.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/rl/config.hpp"

namespace rlg {

// One Euler-Maruyama path of dX = (v - sigma^2 s / 2) dt + sigma dw from t = 1
// down to t = 0 on the uniform grid t_k = 1 - k / N.
struct Trajectory {
  int dim = 1;
  std::vector<double> times;       // N + 1 entries, times[0] = 1
  std::vector<double> states;      // (N + 1) x dim
  std::vector<double> actions;     // N x dim, x_{k+1} - x_k
  std::vector<double> logp_theta;  // N, log-density of each action under the acting model
  std::vector<double> logp_ref;    // N, the same under the reference model
  double reward = 0.0;             // R(x at t = 0)

  std::size_t steps() const noexcept { return logp_theta.size(); }
  Point state(std::size_t k) const {
    return Point::from(std::span<const double>(states).subspan(k * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)));
  }
  Point terminal() const { return state(steps()); }
};

struct RolloutBatch {
  std::vector<Trajectory> trajectories;
  std::size_t rejected = 0;  // trajectories discarded for non-finite values and re-drawn
};

// SDE drift v - sigma^2 / 2 * s with s = (v - a x) / b from the
// velocity-score map at t; xs and v are n x dim.
void sde_drift(std::span<const double> xs, std::span<const double> v, double t, double sigma, const Schedule& sched,
               std::vector<double>& drift);

// log N(next; x + drift dt, sigma^2 |dt| I).
double transition_log_prob(std::span<const double> x, std::span<const double> next, std::span<const double> drift,
                           double dt, double sigma);

// n trajectories driven by `model`, with per-step log-probabilities under
// both `model` and `ref`.
RolloutBatch sde_rollout(const VelocityModel& model, const VelocityModel& ref, const RewardFn& reward,
                         const FinetuneConfig& cfg, std::size_t n, std::uint64_t seed);

}  // namespace rlg
