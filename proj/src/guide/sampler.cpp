#include <algorithm>
#include <cmath>

#include "rlg/core/random.hpp"
#include "rlg/density/tilt.hpp"
#include "rlg/error.hpp"
#include "rlg/eval/metrics.hpp"
#include "rlg/guide/guidance.hpp"

namespace rlg {

namespace {

constexpr std::size_t kBlock = 1024;

class GuidedField {
 public:
  GuidedField(const GuidedModels& models, const GuidanceSpec& spec) : m_(models), spec_(spec) {
    if (!m_.ref) throw Error(ErrorCode::InvalidArgument, "sample: reference model is required");
    const bool needs_theta = spec.mode == GuidanceMode::Rlg || spec.mode == GuidanceMode::CfgThenRlg;
    const bool needs_uncond = spec.mode == GuidanceMode::Cfg || spec.mode == GuidanceMode::CfgThenRlg;
    if (needs_theta && !m_.theta) throw Error(ErrorCode::InvalidArgument, "sample: RLG needs a fine-tuned model");
    if (needs_uncond && (!m_.ref_uncond || (needs_theta && !m_.theta_uncond)))
      throw Error(ErrorCode::InvalidArgument, "sample: cfg modes need unconditional models");
    for (const auto* p : {m_.theta, m_.ref_uncond, m_.theta_uncond})
      if (p && p->dim() != m_.ref->dim()) throw Error(ErrorCode::DimensionMismatch, "sample: model dimensions differ");
  }

  int dim() const { return m_.ref->dim(); }

  void eval(std::span<const double> xs, double t, std::vector<double>& out) {
    const std::size_t n = xs.size() / static_cast<std::size_t>(dim());
    ts_.assign(n, t);
    switch (spec_.mode) {
      case GuidanceMode::None:
        run(*m_.ref, xs, out);
        return;
      case GuidanceMode::Rlg:
        run(*m_.ref, xs, out);
        run(*m_.theta, xs, a_);
        mix(out, a_, spec_.rlg_w);
        return;
      case GuidanceMode::Cfg:
        run(*m_.ref_uncond, xs, out);
        run(*m_.ref, xs, a_);
        mix(out, a_, spec_.cfg_omega);
        return;
      case GuidanceMode::CfgThenRlg:
        run(*m_.ref_uncond, xs, out);
        run(*m_.ref, xs, a_);
        mix(out, a_, spec_.cfg_omega);
        run(*m_.theta_uncond, xs, b_);
        run(*m_.theta, xs, a_);
        mix(b_, a_, spec_.cfg_omega);
        mix(out, b_, spec_.rlg_w);
        return;
    }
  }

 private:
  void run(const VelocityModel& model, std::span<const double> xs, std::vector<double>& out) {
    model.forward(xs, ts_, tape_);
    const auto o = tape_.output();
    out.assign(o.begin(), o.end());
  }

  // a <- (1 - w) a + w b, the same arithmetic as rlg_combine / cfg_combine.
  static void mix(std::vector<double>& a, const std::vector<double>& b, double w) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = (1.0 - w) * a[i] + w * b[i];
  }

  GuidedModels m_;
  GuidanceSpec spec_;
  Tape tape_;
  std::vector<double> ts_, a_, b_;
};

void axpy_into(std::span<const double> x, double a, std::span<const double> k, std::vector<double>& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * k[i];
}

}  // namespace

SampleBatch sample(const GuidedModels& models, const GuidanceSpec& spec, const SamplerConfig& cfg) {
  spec.validate();
  cfg.validate();
  GuidedField field(models, spec);
  const std::size_t d = static_cast<std::size_t>(field.dim());
  const std::size_t N = cfg.steps;
  Rng rng(cfg.seed);

  SampleBatch out;
  out.dim = field.dim();
  out.values.reserve(cfg.batch_size * d);
  std::vector<double> x, v, y, k2, k3, k4, noise;
  std::vector<char> alive;

  for (std::size_t start = 0; start < cfg.batch_size; start += kBlock) {
    const std::size_t n = std::min(kBlock, cfg.batch_size - start);
    x.resize(n * d);
    for (double& e : x) e = rng.normal();
    alive.assign(n, 1);

    for (std::size_t k = 0; k < N; ++k) {
      const double t = 1.0 - static_cast<double>(k) / static_cast<double>(N);
      const double t_next = 1.0 - static_cast<double>(k + 1) / static_cast<double>(N);
      const double h = t_next - t;
      switch (cfg.integrator) {
        case Integrator::Euler:
          field.eval(x, t, v);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += h * v[i];
          break;
        case Integrator::Rk4:
          field.eval(x, t, v);
          axpy_into(x, 0.5 * h, v, y);
          field.eval(y, t + 0.5 * h, k2);
          axpy_into(x, 0.5 * h, k2, y);
          field.eval(y, t + 0.5 * h, k3);
          axpy_into(x, h, k3, y);
          field.eval(y, t_next, k4);
          for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6.0 * (v[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
          break;
        case Integrator::EulerMaruyama: {
          field.eval(x, t, v);
          const auto map = cfg.schedule.velocity_score_map(t);
          const double half_var = 0.5 * cfg.sigma * cfg.sigma;
          const double noise_scale = cfg.sigma * std::sqrt(std::abs(h));
          noise.resize(x.size());
          for (double& e : noise) e = rng.normal();
          for (std::size_t i = 0; i < x.size(); ++i) {
            const double score = (v[i] - map.drift_coef * x[i]) / map.score_coef;
            x[i] += h * (v[i] - half_var * score) + noise_scale * noise[i];
          }
          break;
        }
      }
      for (std::size_t s = 0; s < n; ++s) {
        bool ok = true;
        for (std::size_t i = 0; i < d; ++i) ok = ok && std::isfinite(x[s * d + i]);
        if (!ok) {
          alive[s] = 0;
          for (std::size_t i = 0; i < d; ++i) x[s * d + i] = 0.0;
        }
      }
    }
    for (std::size_t s = 0; s < n; ++s) {
      if (alive[s])
        out.values.insert(out.values.end(), x.begin() + static_cast<std::ptrdiff_t>(s * d),
                          x.begin() + static_cast<std::ptrdiff_t>((s + 1) * d));
      else
        ++out.rejected;
    }
  }
  return out;
}

GaussianMixture predicted_mixture(const TiltTarget& target, double w) {
  if (target.reward.kind() != RewardKind::Linear)
    throw Error(ErrorCode::UnsupportedReward, "sweep scoring needs a linear reward");
  if (!(target.beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "sweep: beta must be positive");
  return tilt_mixture(target.base, (w / target.beta) * target.reward.linear_coef());
}

SweepResult sweep_w(const GuidedModels& models, const std::vector<double>& w_list, const SamplerConfig& cfg,
                    const TiltTarget& target) {
  if (w_list.empty()) throw Error(ErrorCode::InvalidArgument, "sweep_w: empty w list");
  for (double w : w_list)
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidArgument, "sweep_w: w must be finite and >= 0");
  SweepResult result;
  for (double w : w_list) {
    SamplerConfig c = cfg;
    c.seed = seed_for_value(cfg.seed, w);
    GuidanceSpec spec;
    spec.mode = GuidanceMode::Rlg;
    spec.rlg_w = w;
    SampleBatch batch = sample(models, spec, c);
    const ReferenceDensity ref(predicted_mixture(target, w));
    result.rows.push_back({w, effective_beta(target.beta, w), histogram_kl(batch, ref), wasserstein1(batch, ref)});
    result.batches.push_back(std::move(batch));
  }
  return result;
}

}  // namespace rlg
