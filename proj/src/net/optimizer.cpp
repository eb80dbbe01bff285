#include "rlg/net/optimizer.hpp"

#include <cmath>

#include "rlg/error.hpp"
#include "rlg/simd/kernels.hpp"

namespace rlg {

OptimizerState OptimizerState::adam(std::size_t parameter_count, double learning_rate) {
  OptimizerState s;
  s.method = OptimizerMethod::Adam;
  s.learning_rate = learning_rate;
  s.first_moment.assign(parameter_count, 0.0);
  s.second_moment.assign(parameter_count, 0.0);
  return s;
}

OptimizerState OptimizerState::sgd(std::size_t parameter_count, double learning_rate) {
  OptimizerState s = adam(parameter_count, learning_rate);
  s.method = OptimizerMethod::Sgd;
  return s;
}

void optimizer_step(OptimizerState& state, std::span<double> params, std::span<const double> grads) {
  const std::size_t n = params.size();
  if (grads.size() != n || state.first_moment.size() != n || state.second_moment.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "optimizer_step: parameter, gradient and accumulator sizes differ");
  ++state.step;
  if (state.method == OptimizerMethod::Sgd) {
    simd::kernels().axpy(-state.learning_rate, grads.data(), params.data(), n);
    return;
  }
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  simd::kernels().adam_update(params.data(), grads.data(), state.first_moment.data(), state.second_moment.data(), n,
                              state.learning_rate, state.beta1, state.beta2, state.epsilon, bc1, bc2);
}

double l2_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace rlg
