#include "rlg/rl/dpo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rlg/core/random.hpp"
#include "rlg/density/log_density.hpp"
#include "rlg/error.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/net/optimizer.hpp"

namespace rlg {

namespace {

double sigmoid(double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

// -log sigmoid(m), without overflow for large |m|.
double neg_log_sigmoid(double m) { return m >= 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m)); }

std::vector<double> chunked_log_density(const VelocityModel& model, std::span<const double> xs, const Schedule& sched,
                                        std::size_t steps) {
  constexpr std::size_t kChunk = 2048;
  const std::size_t d = static_cast<std::size_t>(model.dim());
  LogDensityOptions opts;
  opts.steps = steps;
  std::vector<double> out;
  out.reserve(xs.size() / d);
  for (std::size_t start = 0; start < xs.size(); start += kChunk * d) {
    const auto part = xs.subspan(start, std::min(kChunk * d, xs.size() - start));
    const auto lp = model_log_density(model, part, sched, opts);
    out.insert(out.end(), lp.begin(), lp.end());
  }
  return out;
}

}  // namespace

std::vector<PreferencePair> bradley_terry_pairs(const VelocityModel& ref, const RewardFn& reward, std::size_t n,
                                                std::uint64_t seed, std::size_t sampler_steps) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "bradley_terry_pairs: n must be >= 1");
  if (reward.dim() != ref.dim()) throw Error(ErrorCode::DimensionMismatch, "bradley_terry_pairs: reward dimension");
  SamplerConfig sc;
  sc.steps = sampler_steps;
  sc.batch_size = 2 * n;
  sc.seed = derive_seed(seed, "dpo.pairs.samples");
  GuidanceSpec none;
  none.mode = GuidanceMode::None;
  SampleBatch xs = sample({&ref, nullptr, nullptr, nullptr}, none, sc);
  if (xs.size() < 2 * n)
    throw Error(ErrorCode::Divergence, "bradley_terry_pairs: " + std::to_string(xs.rejected) +
                                           " reference samples were non-finite");
  Rng labels(derive_seed(seed, "dpo.pairs.labels"));
  std::vector<PreferencePair> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = xs.at(2 * i), b = xs.at(2 * i + 1);
    const bool a_wins = labels.uniform() < sigmoid(reward(a) - reward(b));
    pairs.push_back(a_wins ? PreferencePair{a, b} : PreferencePair{b, a});
  }
  return pairs;
}

namespace {

double batch_loss(const VelocityModel& theta, std::span<const double> xw, std::span<const double> xl,
                  std::span<const double> ref_logp_w, std::span<const double> ref_logp_l, double beta,
                  const Schedule& sched, std::size_t density_steps, std::span<double> grads,
                  std::vector<double>* margins) {
  const std::size_t d = static_cast<std::size_t>(theta.dim());
  const std::size_t n = ref_logp_w.size();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "dpo: empty batch");
  if (xw.size() != n * d || xl.size() != n * d || ref_logp_l.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "dpo: batch shapes disagree");
  if (grads.size() != theta.parameter_count()) throw Error(ErrorCode::ShapeMismatch, "dpo: grads size");

  std::vector<double> xs(xw.begin(), xw.end());
  xs.insert(xs.end(), xl.begin(), xl.end());
  LogDensityOptions opts;
  opts.steps = density_steps;
  const auto lp = model_log_density(theta, xs, sched, opts);

  std::vector<double> weights(2 * n);
  double loss = 0.0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double m = beta * (lp[s] - ref_logp_w[s] - lp[n + s] + ref_logp_l[s]);
    if (margins) margins->push_back(m);
    loss += neg_log_sigmoid(m) * inv_n;
    const double dm = -sigmoid(-m) * beta * inv_n;  // d loss / d log p_theta(x_w)
    weights[s] = dm;
    weights[n + s] = -dm;
  }
  model_log_density_with_grad(theta, xs, sched, opts, weights, grads);
  return loss;
}

}  // namespace

double dpo_batch_loss(const VelocityModel& theta, std::span<const double> xw, std::span<const double> xl,
                      std::span<const double> ref_logp_w, std::span<const double> ref_logp_l, double beta,
                      const Schedule& sched, std::size_t density_steps, std::span<double> grads) {
  return batch_loss(theta, xw, xl, ref_logp_w, ref_logp_l, beta, sched, density_steps, grads, nullptr);
}

DpoValue dpo_loss(const VelocityModel& theta, const VelocityModel& ref, const PreferencePair& pair, double beta,
                  const Schedule& sched, std::span<double> grads, std::size_t density_steps) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "dpo: beta must be > 0");
  require_same_dim(pair.winner, pair.loser, "dpo pair");
  if (pair.winner == pair.loser) throw Error(ErrorCode::InvalidArgument, "dpo: winner and loser coincide");
  if (!theta.same_architecture(ref)) throw Error(ErrorCode::ShapeMismatch, "dpo: theta and ref differ");
  LogDensityOptions opts;
  opts.steps = density_steps;
  std::vector<double> xs(pair.winner.coords().begin(), pair.winner.coords().end());
  xs.insert(xs.end(), pair.loser.coords().begin(), pair.loser.coords().end());
  const auto lr = model_log_density(ref, xs, sched, opts);
  const double rw[1] = {lr[0]}, rl[1] = {lr[1]};
  const auto d = static_cast<std::size_t>(theta.dim());
  std::vector<double> margin;
  const double loss = batch_loss(theta, std::span<const double>(xs).first(d), std::span<const double>(xs).last(d), rw,
                                 rl, beta, sched, density_steps, grads, &margin);
  return {loss, margin.front()};
}

FinetuneResult dpo_finetune(const VelocityModel& ref, const std::vector<PreferencePair>& pairs,
                            const FinetuneConfig& cfg, const FinetuneCallback& on_step) {
  cfg.validate();
  if (pairs.empty()) throw Error(ErrorCode::EmptyInput, "dpo_finetune: no preference pairs");
  const std::size_t d = static_cast<std::size_t>(ref.dim());
  const std::size_t m = pairs.size();
  std::vector<double> all_w(m * d), all_l(m * d);
  for (std::size_t i = 0; i < m; ++i) {
    if (pairs[i].winner.dim() != ref.dim() || pairs[i].loser.dim() != ref.dim())
      throw Error(ErrorCode::DimensionMismatch, "dpo_finetune: pair dimension");
    for (std::size_t j = 0; j < d; ++j) {
      all_w[i * d + j] = pairs[i].winner[static_cast<int>(j)];
      all_l[i * d + j] = pairs[i].loser[static_cast<int>(j)];
    }
  }
  const auto ref_w = chunked_log_density(ref, all_w, cfg.schedule, cfg.density_steps);
  const auto ref_l = chunked_log_density(ref, all_l, cfg.schedule, cfg.density_steps);

  FinetuneResult result{ref, {}, {}};
  auto opt = OptimizerState::adam(ref.parameter_count(), cfg.dpo.learning_rate);
  Rng rng(derive_seed(cfg.seed, "finetune.dpo.order"));
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::size_t cursor = 0;

  const std::size_t n = std::min(cfg.dpo.batch_size, m);
  std::vector<double> xw(n * d), xl(n * d), rw(n), rl(n), grads(ref.parameter_count());
  for (std::size_t step = 1; step <= cfg.dpo.steps; ++step) {
    for (std::size_t s = 0; s < n; ++s) {
      if (cursor == m) {
        std::shuffle(order.begin(), order.end(), rng.engine());
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      for (std::size_t j = 0; j < d; ++j) {
        xw[s * d + j] = all_w[idx * d + j];
        xl[s * d + j] = all_l[idx * d + j];
      }
      rw[s] = ref_w[idx];
      rl[s] = ref_l[idx];
    }
    std::fill(grads.begin(), grads.end(), 0.0);
    FinetuneRecord rec;
    rec.step = step;
    rec.loss = dpo_batch_loss(result.model, xw, xl, rw, rl, cfg.beta, cfg.schedule, cfg.density_steps, grads);
    if (!std::isfinite(rec.loss))
      throw Error(ErrorCode::NonFinite, "dpo: loss became non-finite at step " + std::to_string(step));
    rec.grad_norm = l2_norm(grads);
    optimizer_step(opt, result.model.parameters(), grads);
    result.log.push_back(rec);
    if (on_step) on_step(rec);
  }
  return result;
}

Point implicit_reward_gradient(const VelocityModel& theta, const VelocityModel& ref, const Point& x, double t,
                               double beta, const Schedule& sched) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::InvalidArgument, "implicit_reward_gradient: t outside [0, 1]");
  const Point s_theta = velocity_to_score(theta.forward(x, t), x, t, sched);
  const Point s_ref = velocity_to_score(ref.forward(x, t), x, t, sched);
  return lincomb(beta, s_theta, -beta, s_ref);
}

}  // namespace rlg
