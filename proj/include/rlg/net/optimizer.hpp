#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rlg {

enum class OptimizerMethod { Adam, Sgd };

struct OptimizerState {
  OptimizerMethod method = OptimizerMethod::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step = 0;

  static OptimizerState adam(std::size_t parameter_count, double learning_rate);
  static OptimizerState sgd(std::size_t parameter_count, double learning_rate);
};

// One in-place update; throws ShapeMismatch unless params, grads and both
// accumulators have identical sizes.
void optimizer_step(OptimizerState& state, std::span<double> params, std::span<const double> grads);

double l2_norm(std::span<const double> v);

}  // namespace rlg
