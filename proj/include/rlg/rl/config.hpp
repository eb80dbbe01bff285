#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string_view>

#include "rlg/core/schedule.hpp"

namespace rlg {

enum class FinetuneMethod { PolicyGradient, Rwr, Dpo };

std::string_view to_string(FinetuneMethod m);
// Accepts "pg", "policy-gradient", "rwr" and "dpo".
FinetuneMethod parse_finetune_method(std::string_view s);

enum class SigmaSchedule { Constant, Memoryless };

std::string_view to_string(SigmaSchedule s);
SigmaSchedule parse_sigma_schedule(std::string_view s);

// Batch size, Adam learning rate and number of updates.
struct OptimSettings {
  std::size_t batch_size;
  double learning_rate;
  std::size_t steps;
};

struct FinetuneConfig {
  FinetuneMethod method = FinetuneMethod::PolicyGradient;
  double beta = 0.3;
  OptimSettings pg{64, 1e-5, 10000};
  OptimSettings rwr{256, 1e-3, 20000};
  OptimSettings dpo{64, 3e-4, 1200};
  // Rollout noise sigma(t). Constant uses `sigma`; memoryless uses
  // sigma(t)^2 = -2 * score_coef(min(t, sigma_t_max)), which is 2t / (1 - t)
  // on the rectified-linear schedule. An explicit sigma_fn overrides both.
  SigmaSchedule sigma_schedule = SigmaSchedule::Memoryless;
  double sigma = 0.5;
  double sigma_t_max = 0.98;
  std::function<double(double)> sigma_fn;
  std::size_t rollout_steps = 50;
  std::uint64_t seed = 0;
  Schedule schedule{};
  std::size_t log_interval = 50;

  // rwr: size of the reference sample pool the weights are computed over.
  std::size_t rwr_pool = 20000;
  // dpo: number of Bradley-Terry pairs and RK4 steps of the nested densities.
  std::size_t dpo_pairs = 20000;
  std::size_t density_steps = 100;

  const OptimSettings& optim() const noexcept;
  double sigma_at(double t) const;
  void validate() const;
};

// Per-step training record shared by the three routes; fields a route does
// not produce are left at zero.
struct FinetuneRecord {
  std::size_t step = 0;
  double mean_reward = 0.0;
  double kl_estimate = 0.0;
  double grad_norm = 0.0;
  double loss = 0.0;
};

using FinetuneCallback = std::function<void(const FinetuneRecord&)>;

}  // namespace rlg
