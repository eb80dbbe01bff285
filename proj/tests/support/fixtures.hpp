#pragma once

#include <filesystem>
#include <vector>

#include "rlg/density/mixture.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/train/flow_matching.hpp"

namespace rlg::testing {

// 0.7 N(-2.5, 0.25) + 0.3 N(2.5, 0.49)
GaussianMixture two_mode_mixture();
// r(x) = 0.1 x
RewardFn linear_reward();
inline constexpr double kToyBeta = 0.3;

// Default pretraining run on the two-mode mixture (seed 0), trained once per
// build tree and cached as a checkpoint next to the test binaries.
const VelocityModel& reference_model();
// Windowed loss log of that same run.
const std::vector<LossRecord>& reference_loss_log();
TrainConfig reference_train_config();

std::filesystem::path cache_dir();

}  // namespace rlg::testing
