#include <cmath>
#include <limits>
#include <string>

#include "rlg/error.hpp"
#include "rlg/guide/guidance.hpp"

namespace rlg {

std::string_view to_string(GuidanceMode m) {
  switch (m) {
    case GuidanceMode::None: return "none";
    case GuidanceMode::Rlg: return "rlg";
    case GuidanceMode::Cfg: return "cfg";
    case GuidanceMode::CfgThenRlg: return "cfg-then-rlg";
  }
  return "unknown";
}

std::string_view to_string(Integrator i) {
  switch (i) {
    case Integrator::Euler: return "euler";
    case Integrator::Rk4: return "rk4";
    case Integrator::EulerMaruyama: return "euler-maruyama";
  }
  return "unknown";
}

GuidanceMode parse_guidance_mode(std::string_view s) {
  for (auto m : {GuidanceMode::None, GuidanceMode::Rlg, GuidanceMode::Cfg, GuidanceMode::CfgThenRlg})
    if (s == to_string(m)) return m;
  throw Error(ErrorCode::Parse, "unknown guidance mode '" + std::string(s) + "'");
}

Integrator parse_integrator(std::string_view s) {
  for (auto i : {Integrator::Euler, Integrator::Rk4, Integrator::EulerMaruyama})
    if (s == to_string(i)) return i;
  throw Error(ErrorCode::Parse, "unknown integrator '" + std::string(s) + "'");
}

void GuidanceSpec::validate() const {
  if (!std::isfinite(rlg_w) || !std::isfinite(cfg_omega))
    throw Error(ErrorCode::InvalidArgument, "guidance scales must be finite");
  if (rlg_w < 0.0) throw Error(ErrorCode::InvalidArgument, "RLG scale w must be >= 0");
}

void SamplerConfig::validate() const {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "sampler steps must be >= 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw Error(ErrorCode::InvalidArgument, "sampler sigma must be >= 0");
}

Point rlg_combine(const Point& v_ref, const Point& v_theta, double w) { return lincomb(1.0 - w, v_ref, w, v_theta); }

Point cfg_combine(const Point& v_uncond, const Point& v_cond, double omega) {
  return lincomb(1.0 - omega, v_uncond, omega, v_cond);
}

Point rlg_score(const Point& s_ref, const Point& s_theta, double w) { return lincomb(1.0 - w, s_ref, w, s_theta); }

double effective_beta(double beta, double w) {
  if (!(beta > 0.0)) throw Error(ErrorCode::InvalidArgument, "effective_beta: beta must be positive");
  if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, "effective_beta: w must be >= 0");
  if (w == 0.0) return std::numeric_limits<double>::infinity();
  return beta / w;
}

}  // namespace rlg
