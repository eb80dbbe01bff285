#include "rlg/rl/rwr.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/net/optimizer.hpp"
#include "rlg/train/flow_matching.hpp"

namespace rlg {

std::vector<double> rwr_log_weights(const RewardFn& reward, std::span<const double> xs, int dim, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "rwr: beta must be > 0");
  if (reward.dim() != dim) throw Error(ErrorCode::DimensionMismatch, "rwr: reward dimension");
  const std::size_t d = static_cast<std::size_t>(dim);
  std::vector<double> out(xs.size() / d);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = reward(Point::from(xs.subspan(s * d, d))) / beta;
  return out;
}

std::vector<double> rwr_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw Error(ErrorCode::EmptyInput, "rwr_weights: no samples");
  const double top = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> w(log_weights.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i] - top);
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(0.995 * static_cast<double>(sorted.size())));
  const double cap = sorted[std::max<std::size_t>(rank, 1) - 1];
  double sum = 0.0;
  for (double& v : w) {
    v = std::min(v, cap);
    sum += v;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) throw Error(ErrorCode::NonFinite, "rwr_weights: weights are not finite");
  const double scale = static_cast<double>(w.size()) / sum;
  for (double& v : w) v *= scale;
  return w;
}

double effective_sample_size(std::span<const double> weights) {
  double s = 0.0, s2 = 0.0;
  for (double v : weights) {
    s += v;
    s2 += v * v;
  }
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

FinetuneResult rwr_finetune(const VelocityModel& ref, const RewardFn& reward, double beta, const FinetuneConfig& cfg,
                            const FinetuneCallback& on_step) {
  cfg.validate();
  const int dim = ref.dim();
  const std::size_t d = static_cast<std::size_t>(dim);

  SamplerConfig sc;
  sc.batch_size = cfg.rwr_pool;
  sc.seed = derive_seed(cfg.seed, "finetune.rwr.pool");
  sc.schedule = cfg.schedule;
  GuidanceSpec none;
  none.mode = GuidanceMode::None;
  const SampleBatch pool = sample({&ref, nullptr, nullptr, nullptr}, none, sc);
  const std::vector<double> weights = rwr_weights(rwr_log_weights(reward, pool.values, dim, beta));
  const std::size_t pool_n = weights.size();

  FinetuneResult result{ref, {}, {}};
  auto opt = OptimizerState::adam(ref.parameter_count(), cfg.rwr.learning_rate);
  Rng rng(derive_seed(cfg.seed, "finetune.rwr.data"));
  std::uniform_int_distribution<std::size_t> pick(0, pool_n - 1);
  const std::size_t n = cfg.rwr.batch_size;
  std::vector<double> x0(n * d), x1(n * d), t(n), w(n), grads(ref.parameter_count());
  Tape tape;
  const double eps = cfg.schedule.eps_clamp();
  std::size_t low_ess = 0;
  for (std::size_t step = 1; step <= cfg.rwr.steps; ++step) {
    FinetuneRecord rec;
    rec.step = step;
    double wsum = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t idx = pick(rng.engine());
      for (std::size_t i = 0; i < d; ++i) x0[s * d + i] = pool.values[idx * d + i];
      w[s] = weights[idx] / static_cast<double>(n);
      wsum += w[s];
      rec.mean_reward += w[s] * reward(Point::from(std::span<const double>(x0).subspan(s * d, d)));
    }
    rec.mean_reward /= wsum;
    for (double& v : x1) v = rng.normal();
    for (double& v : t) v = rng.uniform(eps, 1.0 - eps);
    if (effective_sample_size(w) < 0.05 * static_cast<double>(n)) ++low_ess;

    std::fill(grads.begin(), grads.end(), 0.0);
    rec.loss = weighted_cfm_loss(result.model, x0, x1, t, w, cfg.schedule, grads, tape);
    if (!std::isfinite(rec.loss))
      throw Error(ErrorCode::NonFinite, "rwr: loss became non-finite at step " + std::to_string(step));
    rec.grad_norm = l2_norm(grads);
    optimizer_step(opt, result.model.parameters(), grads);
    result.log.push_back(rec);
    if (on_step) on_step(rec);
  }
  if (low_ess > 0)
    result.warnings.push_back("rwr: effective sample size below 5% of the batch in " + std::to_string(low_ess) +
                              " of " + std::to_string(cfg.rwr.steps) + " steps");
  if (pool.rejected > 0)
    result.warnings.push_back("rwr: " + std::to_string(pool.rejected) + " reference samples were non-finite");
  return result;
}

}  // namespace rlg
