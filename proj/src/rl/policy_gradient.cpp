#include "rlg/rl/policy_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"

namespace rlg {

double policy_gradient_loss(const VelocityModel& theta, const RolloutBatch& batch, const FinetuneConfig& cfg,
                            std::span<double> grads) {
  const auto& trs = batch.trajectories;
  const std::size_t n = trs.size();
  if (n < 2) throw Error(ErrorCode::EmptyInput, "policy gradient needs at least two trajectories");
  if (grads.size() != theta.parameter_count()) throw Error(ErrorCode::ShapeMismatch, "policy gradient: grads size");
  const std::size_t N = trs.front().steps();
  const std::size_t d = static_cast<std::size_t>(theta.dim());
  for (const auto& tr : trs)
    if (tr.steps() != N || tr.dim != theta.dim()) throw Error(ErrorCode::ShapeMismatch, "ragged rollout batch");

  // Reward-to-go with the per-step KL penalty folded in.
  std::vector<double> q(n * N);
  double mean_return = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = trs[i].reward;
    for (std::size_t k = N; k-- > 0;) {
      acc -= cfg.beta * (trs[i].logp_theta[k] - trs[i].logp_ref[k]);
      q[i * N + k] = acc;
    }
    mean_return += acc;
  }
  mean_return /= static_cast<double>(n);

  std::vector<double> col_sum(N, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < N; ++k) col_sum[k] += q[i * N + k];

  // Points laid out step-major so each block shares one time.
  std::vector<double> xs(N * n * d), ts(N * n);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      ts[k * n + i] = trs[i].times[k];
      for (std::size_t j = 0; j < d; ++j) xs[(k * n + i) * d + j] = trs[i].states[k * d + j];
    }
  Tape tape;
  theta.forward(xs, ts, tape);
  const auto v = tape.output();

  std::vector<double> upstream(N * n * d), drift;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < N; ++k) {
    const double t = trs.front().times[k];
    const double dt = trs.front().times[k + 1] - t;
    const double sigma = cfg.sigma_at(t);
    const double var = sigma * sigma * std::abs(dt);
    const auto map = cfg.schedule.velocity_score_map(t);
    const double dv = 1.0 - sigma * sigma / (2.0 * map.score_coef);  // d(drift)/d(v)
    const std::span<const double> xk(xs.data() + k * n * d, n * d);
    sde_drift(xk, v.subspan(k * n * d, n * d), t, sigma, cfg.schedule, drift);
    for (std::size_t i = 0; i < n; ++i) {
      const double baseline = (col_sum[k] - q[i * N + k]) / static_cast<double>(n - 1);
      const double adv = q[i * N + k] - baseline;
      for (std::size_t j = 0; j < d; ++j) {
        const double resid = trs[i].actions[k * d + j] - drift[i * d + j] * dt;
        const double dlogp_dv = resid / var * dt * dv;
        upstream[(k * n + i) * d + j] = -inv_n * adv * dlogp_dv;
      }
    }
  }
  theta.backward(tape, upstream, {}, grads);
  return -mean_return;
}

FinetuneRecord policy_gradient_step(VelocityModel& theta, const VelocityModel& ref, const RewardFn& reward,
                                    const FinetuneConfig& cfg, OptimizerState& opt, std::uint64_t rollout_seed) {
  const RolloutBatch batch = sde_rollout(theta, ref, reward, cfg, cfg.pg.batch_size, rollout_seed);
  std::vector<double> grads(theta.parameter_count(), 0.0);
  FinetuneRecord rec;
  rec.loss = policy_gradient_loss(theta, batch, cfg, grads);
  for (const auto& tr : batch.trajectories) {
    rec.mean_reward += tr.reward;
    for (std::size_t k = 0; k < tr.steps(); ++k) rec.kl_estimate += tr.logp_theta[k] - tr.logp_ref[k];
  }
  const double n = static_cast<double>(batch.trajectories.size());
  rec.mean_reward /= n;
  rec.kl_estimate /= n;
  rec.grad_norm = l2_norm(grads);
  optimizer_step(opt, theta.parameters(), grads);
  return rec;
}

FinetuneResult policy_gradient_finetune(const VelocityModel& ref, const RewardFn& reward, const FinetuneConfig& cfg,
                                        const FinetuneCallback& on_step) {
  cfg.validate();
  FinetuneResult result{ref, {}, {}};
  auto opt = OptimizerState::adam(ref.parameter_count(), cfg.pg.learning_rate);
  Rng seeds(derive_seed(cfg.seed, "finetune.pg.rollout"));
  for (std::size_t step = 1; step <= cfg.pg.steps; ++step) {
    FinetuneRecord rec = policy_gradient_step(result.model, ref, reward, cfg, opt, seeds.engine()());
    rec.step = step;
    result.log.push_back(rec);
    if (on_step) on_step(rec);
  }
  return result;
}

}  // namespace rlg
