#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rlg/core/point.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/rl/config.hpp"
#include "rlg/rl/policy_gradient.hpp"

namespace rlg {

struct PreferencePair {
  Point winner;
  Point loser;
};

// Pairs (a, b) drawn from the reference model; a wins with probability
// sigmoid(R(a) - R(b)).
std::vector<PreferencePair> bradley_terry_pairs(const VelocityModel& ref, const RewardFn& reward, std::size_t n,
                                                std::uint64_t seed, std::size_t sampler_steps = 200);

struct DpoValue {
  double loss;
  double margin;  // beta * (log-ratio of winner - log-ratio of loser)
};

// -log sigmoid(margin); the theta-gradient is added into grads.
DpoValue dpo_loss(const VelocityModel& theta, const VelocityModel& ref, const PreferencePair& pair, double beta,
                  const Schedule& sched, std::span<double> grads, std::size_t density_steps = 100);

// Mean loss over a batch whose reference log-densities are already known.
// xw, xl are n x dim; the mean-loss gradient is added into grads.
double dpo_batch_loss(const VelocityModel& theta, std::span<const double> xw, std::span<const double> xl,
                      std::span<const double> ref_logp_w, std::span<const double> ref_logp_l, double beta,
                      const Schedule& sched, std::size_t density_steps, std::span<double> grads);

FinetuneResult dpo_finetune(const VelocityModel& ref, const std::vector<PreferencePair>& pairs,
                            const FinetuneConfig& cfg, const FinetuneCallback& on_step = {});

// beta * (s_theta - s_ref) at (x, t), scores from velocity_to_score.
Point implicit_reward_gradient(const VelocityModel& theta, const VelocityModel& ref, const Point& x, double t,
                               double beta, const Schedule& sched);

}  // namespace rlg
