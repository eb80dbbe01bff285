#pragma once

#include <span>
#include <vector>

#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/rl/config.hpp"
#include "rlg/rl/policy_gradient.hpp"

namespace rlg {

// R(x) / beta for every row of xs (n x dim).
std::vector<double> rwr_log_weights(const RewardFn& reward, std::span<const double> xs, int dim, double beta);

// exp(log_w - max), clipped at the 99.5th percentile and scaled to mean 1.
std::vector<double> rwr_weights(std::span<const double> log_weights);

// (sum w)^2 / sum w^2
double effective_sample_size(std::span<const double> weights);

// Reward-weighted flow matching on a pool of reference samples, starting
// from theta = ref.
FinetuneResult rwr_finetune(const VelocityModel& ref, const RewardFn& reward, double beta, const FinetuneConfig& cfg,
                            const FinetuneCallback& on_step = {});

}  // namespace rlg
