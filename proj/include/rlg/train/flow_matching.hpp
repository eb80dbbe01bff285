#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rlg/core/schedule.hpp"
#include "rlg/density/mixture.hpp"
#include "rlg/net/mlp.hpp"

namespace rlg {

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t steps = 20000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  ScheduleKind schedule = ScheduleKind::RectifiedLinear;
  std::size_t log_interval = 100;
  std::vector<std::size_t> hidden = {64, 64, 64};

  void validate() const;
};

struct LossRecord {
  std::size_t step;  // last step of the window
  double loss;       // mean loss over the window
};

// sum_s weights[s] * |model(x_t, t) - target_velocity(x0, x1, t)|^2 with
// x_t = interpolate(x0, x1, t); gradients (upstream 2 w_s residual_s) are
// added into grads. Batches are n x dim (t has n entries).
double weighted_cfm_loss(const VelocityModel& model, std::span<const double> x0, std::span<const double> x1,
                         std::span<const double> t, std::span<const double> weights, const Schedule& sched,
                         std::span<double> grads, Tape& tape);

// Uniform weights 1/n.
double cfm_loss(const VelocityModel& model, std::span<const double> x0, std::span<const double> x1,
                std::span<const double> t, const Schedule& sched, std::span<double> grads);

struct PretrainResult {
  VelocityModel model;
  std::vector<LossRecord> log;
};

using LossCallback = std::function<void(const LossRecord&)>;

// Flow-matching regression onto target: x0 from the target, x1 ~ N(0, I),
// t ~ U[eps, 1 - eps] per example; Adam on the full parameter vector.
PretrainResult pretrain(const GaussianMixture& target, const TrainConfig& cfg, const LossCallback& on_log = {});

}  // namespace rlg
