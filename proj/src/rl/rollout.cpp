#include "rlg/rl/rollout.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"

namespace rlg {

std::string_view to_string(FinetuneMethod m) {
  switch (m) {
    case FinetuneMethod::PolicyGradient: return "pg";
    case FinetuneMethod::Rwr: return "rwr";
    case FinetuneMethod::Dpo: return "dpo";
  }
  return "unknown";
}

FinetuneMethod parse_finetune_method(std::string_view s) {
  if (s == "pg" || s == "policy-gradient") return FinetuneMethod::PolicyGradient;
  if (s == "rwr") return FinetuneMethod::Rwr;
  if (s == "dpo") return FinetuneMethod::Dpo;
  throw Error(ErrorCode::Parse, "unknown fine-tuning method '" + std::string(s) + "' (expected pg, rwr or dpo)");
}

std::string_view to_string(SigmaSchedule s) { return s == SigmaSchedule::Constant ? "constant" : "memoryless"; }

SigmaSchedule parse_sigma_schedule(std::string_view s) {
  if (s == "constant") return SigmaSchedule::Constant;
  if (s == "memoryless") return SigmaSchedule::Memoryless;
  throw Error(ErrorCode::Parse, "unknown sigma schedule '" + std::string(s) + "' (expected constant or memoryless)");
}

const OptimSettings& FinetuneConfig::optim() const noexcept {
  switch (method) {
    case FinetuneMethod::Rwr: return rwr;
    case FinetuneMethod::Dpo: return dpo;
    case FinetuneMethod::PolicyGradient: break;
  }
  return pg;
}

double FinetuneConfig::sigma_at(double t) const {
  if (sigma_fn) return sigma_fn(t);
  if (sigma_schedule == SigmaSchedule::Constant) return sigma;
  return std::sqrt(-2.0 * schedule.velocity_score_map(std::min(t, sigma_t_max)).score_coef);
}

void FinetuneConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidArgument, "finetune." + field + " " + why);
  };
  if (!(beta > 0.0) || !std::isfinite(beta)) fail("beta", "must be > 0");
  for (const auto& [name, o] : {std::pair{"pg", &pg}, std::pair{"rwr", &rwr}, std::pair{"dpo", &dpo}}) {
    const std::string prefix(name);
    if (o->batch_size < 2) fail(prefix + ".batch_size", "must be >= 2");
    if (!(o->learning_rate > 0.0) || !std::isfinite(o->learning_rate)) fail(prefix + ".learning_rate", "must be > 0");
    if (o->steps < 1) fail(prefix + ".steps", "must be >= 1");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) fail("sigma", "must be >= 0");
  if (!(sigma_t_max > 0.0 && sigma_t_max < 1.0)) fail("sigma_t_max", "must lie in (0, 1)");
  if (rollout_steps < 1) fail("rollout_steps", "must be >= 1");
  if (log_interval < 1) fail("log_interval", "must be >= 1");
  if (rwr_pool < 2) fail("rwr_pool", "must be >= 2");
  if (dpo_pairs < 1) fail("dpo_pairs", "must be >= 1");
  if (density_steps < 100) fail("density_steps", "must be >= 100");
  for (std::size_t k = 0; k <= rollout_steps; ++k) {
    const double s = sigma_at(1.0 - static_cast<double>(k) / static_cast<double>(rollout_steps));
    if (!(s >= 0.0) || !std::isfinite(s)) fail("sigma", "schedule must be finite and >= 0");
  }
}

void sde_drift(std::span<const double> xs, std::span<const double> v, double t, double sigma, const Schedule& sched,
               std::vector<double>& drift) {
  const auto map = sched.velocity_score_map(t);
  const double half_var = 0.5 * sigma * sigma;
  drift.resize(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double score = (v[i] - map.drift_coef * xs[i]) / map.score_coef;
    drift[i] = v[i] - half_var * score;
  }
}

double transition_log_prob(std::span<const double> x, std::span<const double> next, std::span<const double> drift,
                           double dt, double sigma) {
  const double var = sigma * sigma * std::abs(dt);
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = next[i] - x[i] - drift[i] * dt;
    lp += -0.5 * r * r / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
  }
  return lp;
}

namespace {

// Runs n paths in lock-step; returns them all, finite or not.
std::vector<Trajectory> run_paths(const VelocityModel& model, const VelocityModel& ref, const FinetuneConfig& cfg,
                                  std::size_t n, Rng& rng) {
  const std::size_t d = static_cast<std::size_t>(model.dim());
  const std::size_t N = cfg.rollout_steps;
  std::vector<Trajectory> out(n);
  for (auto& tr : out) {
    tr.dim = model.dim();
    tr.times.resize(N + 1);
    tr.states.resize((N + 1) * d);
    tr.actions.resize(N * d);
    tr.logp_theta.resize(N);
    tr.logp_ref.resize(N);
  }
  std::vector<double> x(n * d), ts(n), v_theta, v_ref, drift_theta, drift_ref;
  for (double& e : x) e = rng.normal();
  Tape tape;
  for (std::size_t k = 0; k < N; ++k) {
    const double t = 1.0 - static_cast<double>(k) / static_cast<double>(N);
    const double t_next = 1.0 - static_cast<double>(k + 1) / static_cast<double>(N);
    const double dt = t_next - t;
    const double sigma = cfg.sigma_at(t);
    ts.assign(n, t);
    model.forward(x, ts, tape);
    v_theta.assign(tape.output().begin(), tape.output().end());
    ref.forward(x, ts, tape);
    v_ref.assign(tape.output().begin(), tape.output().end());
    sde_drift(x, v_theta, t, sigma, cfg.schedule, drift_theta);
    sde_drift(x, v_ref, t, sigma, cfg.schedule, drift_ref);
    const double noise_scale = sigma * std::sqrt(std::abs(dt));
    for (std::size_t s = 0; s < n; ++s) {
      auto& tr = out[s];
      tr.times[k] = t;
      const std::span<double> xs(x.data() + s * d, d);
      std::copy(xs.begin(), xs.end(), tr.states.begin() + static_cast<std::ptrdiff_t>(k * d));
      double next[kMaxDim];
      for (std::size_t i = 0; i < d; ++i) {
        next[i] = xs[i] + drift_theta[s * d + i] * dt + noise_scale * rng.normal();
        tr.actions[k * d + i] = next[i] - xs[i];
      }
      const std::span<const double> nx(next, d);
      tr.logp_theta[k] = transition_log_prob(xs, nx, std::span<const double>(drift_theta).subspan(s * d, d), dt, sigma);
      tr.logp_ref[k] = transition_log_prob(xs, nx, std::span<const double>(drift_ref).subspan(s * d, d), dt, sigma);
      bool finite = std::isfinite(tr.logp_theta[k]) && std::isfinite(tr.logp_ref[k]);
      for (std::size_t i = 0; i < d; ++i) finite = finite && std::isfinite(next[i]);
      // Keep the lock-step batch evaluable: a broken path is parked at zero
      // and flagged by a NaN log-probability.
      for (std::size_t i = 0; i < d; ++i) xs[i] = finite ? next[i] : 0.0;
      if (!finite) tr.logp_theta[k] = std::numeric_limits<double>::quiet_NaN();
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    auto& tr = out[s];
    tr.times[N] = 0.0;
    std::copy(x.begin() + static_cast<std::ptrdiff_t>(s * d), x.begin() + static_cast<std::ptrdiff_t>((s + 1) * d),
              tr.states.begin() + static_cast<std::ptrdiff_t>(N * d));
  }
  return out;
}

bool trajectory_finite(const Trajectory& tr) {
  for (double v : tr.logp_theta)
    if (!std::isfinite(v)) return false;
  for (double v : tr.logp_ref)
    if (!std::isfinite(v)) return false;
  for (double v : tr.states)
    if (!std::isfinite(v)) return false;
  return std::isfinite(tr.reward);
}

}  // namespace

RolloutBatch sde_rollout(const VelocityModel& model, const VelocityModel& ref, const RewardFn& reward,
                         const FinetuneConfig& cfg, std::size_t n, std::uint64_t seed) {
  cfg.validate();
  if (!model.same_architecture(ref)) throw Error(ErrorCode::ShapeMismatch, "sde_rollout: model and ref differ");
  if (reward.dim() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "sde_rollout: reward dimension");
  for (std::size_t k = 0; k < cfg.rollout_steps; ++k)
    if (!(cfg.sigma_at(1.0 - static_cast<double>(k) / static_cast<double>(cfg.rollout_steps)) > 0.0))
      throw Error(ErrorCode::InvalidArgument, "sde_rollout: sigma must be > 0 for transitions to have a density");

  constexpr int kMaxRounds = 20;
  Rng rng(seed);
  RolloutBatch batch;
  batch.trajectories.reserve(n);
  for (int round = 0; round < kMaxRounds && batch.trajectories.size() < n; ++round) {
    auto paths = run_paths(model, ref, cfg, n - batch.trajectories.size(), rng);
    for (auto& tr : paths) {
      tr.reward = reward(tr.terminal());
      if (trajectory_finite(tr))
        batch.trajectories.push_back(std::move(tr));
      else
        ++batch.rejected;
    }
  }
  if (batch.trajectories.size() < n)
    throw Error(ErrorCode::Divergence, "sde_rollout: " + std::to_string(batch.rejected) +
                                           " trajectories rejected, could not fill a batch of " + std::to_string(n));
  return batch;
}

}  // namespace rlg
