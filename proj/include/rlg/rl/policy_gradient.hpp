#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/net/optimizer.hpp"
#include "rlg/rl/config.hpp"
#include "rlg/rl/rollout.hpp"

namespace rlg {

// Score-function gradient of -E[R(x_0) - beta sum_k (log pi_theta - log pi_ref)]
// over a rollout batch: each step is weighted by its reward-to-go minus the
// leave-one-out mean of the other trajectories at that step. Adds into grads
// and returns the negated mean return.
double policy_gradient_loss(const VelocityModel& theta, const RolloutBatch& batch, const FinetuneConfig& cfg,
                            std::span<double> grads);

// Rollout, gradient and one Adam step on theta.
FinetuneRecord policy_gradient_step(VelocityModel& theta, const VelocityModel& ref, const RewardFn& reward,
                                    const FinetuneConfig& cfg, OptimizerState& opt, std::uint64_t rollout_seed);

struct FinetuneResult {
  VelocityModel model;
  std::vector<FinetuneRecord> log;
  std::vector<std::string> warnings;
};

// cfg.steps policy-gradient updates starting from theta = ref.
FinetuneResult policy_gradient_finetune(const VelocityModel& ref, const RewardFn& reward, const FinetuneConfig& cfg,
                                        const FinetuneCallback& on_step = {});

}  // namespace rlg
