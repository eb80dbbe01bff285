#include "rlg/train/flow_matching.hpp"

#include <cmath>
#include <string>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"
#include "rlg/net/optimizer.hpp"

namespace rlg {

void TrainConfig::validate() const {
  if (batch_size < 1) throw Error(ErrorCode::InvalidArgument, "pretrain.batch_size must be >= 1");
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "pretrain.steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw Error(ErrorCode::InvalidArgument, "pretrain.learning_rate must be positive");
  if (log_interval < 1) throw Error(ErrorCode::InvalidArgument, "pretrain.log_interval must be >= 1");
}

double weighted_cfm_loss(const VelocityModel& model, std::span<const double> x0, std::span<const double> x1,
                         std::span<const double> t, std::span<const double> weights, const Schedule& sched,
                         std::span<double> grads, Tape& tape) {
  const std::size_t d = static_cast<std::size_t>(model.dim());
  const std::size_t n = t.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "cfm_loss: empty batch");
  if (x0.size() != n * d || x1.size() != n * d || weights.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "cfm_loss: batches are not aligned");

  std::vector<double> xt(n * d), target(n * d);
  for (std::size_t s = 0; s < n; ++s) {
    const double a = sched.alpha(t[s]), b = sched.beta(t[s]);
    const double ad = sched.alpha_dot(t[s]), bd = sched.beta_dot(t[s]);
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = s * d + i;
      xt[k] = b * x1[k] + a * x0[k];
      target[k] = bd * x1[k] + ad * x0[k];
    }
  }
  model.forward(xt, t, tape);
  const auto out = tape.output();
  std::vector<double> upstream(n * d);
  double loss = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    double sq = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t k = s * d + i;
      const double r = out[k] - target[k];
      sq += r * r;
      upstream[k] = 2.0 * weights[s] * r;
    }
    loss += weights[s] * sq;
  }
  model.backward(tape, upstream, {}, grads);
  return loss;
}

double cfm_loss(const VelocityModel& model, std::span<const double> x0, std::span<const double> x1,
                std::span<const double> t, const Schedule& sched, std::span<double> grads) {
  if (t.empty()) throw Error(ErrorCode::EmptyInput, "cfm_loss: empty batch");
  std::vector<double> w(t.size(), 1.0 / static_cast<double>(t.size()));
  Tape tape;
  return weighted_cfm_loss(model, x0, x1, t, w, sched, grads, tape);
}

PretrainResult pretrain(const GaussianMixture& target, const TrainConfig& cfg, const LossCallback& on_log) {
  cfg.validate();
  const Schedule sched(cfg.schedule);
  const int dim = target.dim();
  const std::size_t d = static_cast<std::size_t>(dim);
  PretrainResult result{VelocityModel::glorot(dim, cfg.hidden, derive_seed(cfg.seed, "pretrain.init")), {}};
  VelocityModel& model = result.model;
  model.set_init_seed(cfg.seed);

  Rng data_rng(derive_seed(cfg.seed, "pretrain.data"));
  auto opt = OptimizerState::adam(model.parameter_count(), cfg.learning_rate);
  std::vector<double> grads(model.parameter_count());
  const std::size_t n = cfg.batch_size;
  std::vector<double> x1(n * d), t(n), w(n, 1.0 / static_cast<double>(n));
  Tape tape;

  double window = 0.0;
  std::size_t window_count = 0;
  const double eps = sched.eps_clamp();
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    const SampleBatch x0 = target.sample(n, data_rng);
    for (double& v : x1) v = data_rng.normal();
    for (double& v : t) v = data_rng.uniform(eps, 1.0 - eps);

    std::fill(grads.begin(), grads.end(), 0.0);
    const double loss = weighted_cfm_loss(model, x0.values, x1, t, w, sched, grads, tape);
    if (!std::isfinite(loss))
      throw Error(ErrorCode::NonFinite, "pretrain: loss became non-finite at step " + std::to_string(step) +
                                            " (last window mean " +
                                            std::to_string(window_count ? window / window_count : 0.0) + ")");
    optimizer_step(opt, model.parameters(), grads);

    window += loss;
    ++window_count;
    if (step % cfg.log_interval == 0 || step == cfg.steps) {
      result.log.push_back({step, window / static_cast<double>(window_count)});
      if (on_log) on_log(result.log.back());
      window = 0.0;
      window_count = 0;
    }
  }
  return result;
}

}  // namespace rlg
