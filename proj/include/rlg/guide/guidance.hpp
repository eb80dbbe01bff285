#pragma once

#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

#include "rlg/core/point.hpp"
#include "rlg/core/sample_batch.hpp"
#include "rlg/core/schedule.hpp"
#include "rlg/density/mixture.hpp"
#include "rlg/density/reward.hpp"
#include "rlg/net/mlp.hpp"

namespace rlg {

enum class GuidanceMode { None, Rlg, Cfg, CfgThenRlg };
enum class Integrator { Euler, Rk4, EulerMaruyama };

std::string_view to_string(GuidanceMode m);
std::string_view to_string(Integrator i);
GuidanceMode parse_guidance_mode(std::string_view s);
Integrator parse_integrator(std::string_view s);

struct GuidanceSpec {
  double rlg_w = 1.0;      // 0 reference, 1 fine-tuned, > 1 extrapolation
  double cfg_omega = 1.0;  // only used by the cfg modes
  GuidanceMode mode = GuidanceMode::Rlg;

  void validate() const;
};

struct SamplerConfig {
  std::size_t steps = 200;
  Integrator integrator = Integrator::Euler;
  double sigma = 0.5;  // constant diffusion for euler-maruyama
  std::uint64_t seed = 0;
  std::size_t batch_size = 50000;
  Schedule schedule{};

  void validate() const;
};

// (1 - w) v_ref + w v_theta
Point rlg_combine(const Point& v_ref, const Point& v_theta, double w);
// (1 - omega) v_uncond + omega v_cond
Point cfg_combine(const Point& v_uncond, const Point& v_cond, double omega);
// (1 - w) s_ref + w s_theta
Point rlg_score(const Point& s_ref, const Point& s_theta, double w);

// beta / w, or +infinity ("no tilt") at w = 0.
double effective_beta(double beta, double w);
inline bool is_no_tilt(double beta_eff) { return beta_eff == std::numeric_limits<double>::infinity(); }

// Velocity models taking part in guided sampling. The unconditional members
// are only consulted by the cfg modes.
struct GuidedModels {
  const VelocityModel* ref = nullptr;
  const VelocityModel* theta = nullptr;
  const VelocityModel* ref_uncond = nullptr;
  const VelocityModel* theta_uncond = nullptr;
};

// Draws x ~ N(0, I) at t = 1 and integrates the guided field down to t = 0.
// Samples that become non-finite are dropped and counted in `rejected`.
SampleBatch sample(const GuidedModels& models, const GuidanceSpec& spec, const SamplerConfig& cfg);

struct SweepRow {
  double w;
  double beta_eff;
  double kl;
  double w1;
};

struct SweepResult {
  std::vector<SampleBatch> batches;
  std::vector<SweepRow> rows;
};

// Linear-reward tilting problem the sweep is scored against.
struct TiltTarget {
  GaussianMixture base;
  RewardFn reward;
  double beta;
};

// Mixture predicted for RLG scale w: base tilted by w * coef / beta.
GaussianMixture predicted_mixture(const TiltTarget& target, double w);

// One RLG batch per w (seed = seed_for_value(cfg.seed, w)), scored with
// histogram KL and Wasserstein-1 against predicted_mixture(target, w).
SweepResult sweep_w(const GuidedModels& models, const std::vector<double>& w_list, const SamplerConfig& cfg,
                    const TiltTarget& target);

}  // namespace rlg
