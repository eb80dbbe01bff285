// End-to-end acceptance run. Recomputes every artifact from scratch and
// prints one PASS/FAIL line per criterion; exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlg/core/random.hpp"
#include "rlg/core/schedule.hpp"
#include "rlg/density/log_density.hpp"
#include "rlg/density/mixture.hpp"
#include "rlg/density/tilt.hpp"
#include "rlg/eval/metrics.hpp"
#include "rlg/guide/guidance.hpp"
#include "rlg/rl/dpo.hpp"
#include "rlg/rl/policy_gradient.hpp"
#include "rlg/rl/rwr.hpp"
#include "rlg/train/flow_matching.hpp"

using namespace rlg;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

GaussianMixture two_mode_mixture() {
  return GaussianMixture({{0.7, Point{-2.5}, Point{0.25}}, {0.3, Point{2.5}, Point{0.49}}});
}

RewardFn linear_reward() { return RewardFn::linear(Point{0.1}); }

constexpr double kBeta = 0.3;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

SamplerConfig euler200(std::uint64_t seed) {
  SamplerConfig sc;
  sc.steps = 200;
  sc.integrator = Integrator::Euler;
  sc.batch_size = 50000;
  sc.seed = seed;
  return sc;
}

GuidanceSpec plain() {
  GuidanceSpec g;
  g.mode = GuidanceMode::None;
  return g;
}

GuidanceSpec rlg_at(double w) {
  GuidanceSpec g;
  g.mode = GuidanceMode::Rlg;
  g.rlg_w = w;
  return g;
}

// Shared artifacts, built on first use.
struct Lab {
  std::optional<VelocityModel> ref;
  std::optional<VelocityModel> pg;
  double pretrain_seconds = 0.0;
  double pg_seconds = 0.0;

  const VelocityModel& reference() {
    if (!ref) {
      const auto start = Clock::now();
      ref = pretrain(two_mode_mixture(), TrainConfig{}).model;
      pretrain_seconds = seconds_since(start);
    }
    return *ref;
  }

  static FinetuneConfig pg_config() {
    FinetuneConfig fc;
    fc.method = FinetuneMethod::PolicyGradient;
    fc.beta = kBeta;
    fc.pg.batch_size = 64;
    fc.pg.learning_rate = 1e-5;
    return fc;
  }

  const VelocityModel& policy_gradient() {
    if (!pg) {
      const VelocityModel& r = reference();
      const auto start = Clock::now();
      pg = policy_gradient_finetune(r, linear_reward(), pg_config()).model;
      pg_seconds = seconds_since(start);
    }
    return *pg;
  }
};

Lab lab;

Verdict guided_sweep_matches_tilt() {
  const auto start = Clock::now();
  const VelocityModel& ref = lab.reference();
  const VelocityModel& theta = lab.policy_gradient();
  const TiltTarget target{two_mode_mixture(), linear_reward(), kBeta};
  bool ok = true;
  std::string detail;
  for (double w : {0.5, 1.0, 2.0}) {
    const SampleBatch batch = sample({&ref, &theta}, rlg_at(w), euler200(derive_seed(1, "sweep")));
    const GaussianMixture predicted = tilt_mixture(two_mode_mixture(), Point{w * 0.1 / kBeta});
    const double kl = histogram_kl(batch, predicted);
    const double w1 = wasserstein1(batch, predicted);
    ok = ok && kl <= 0.10 && w1 <= 0.15;
    detail += fmt("w=%g kl=%.4f w1=%.4f; ", w, kl, w1);
  }
  const double total = seconds_since(start);
  ok = ok && total <= 600.0;
  detail += fmt("pg steps=%zu, runtime %.0fs (pretrain %.0fs, finetune %.0fs)", Lab::pg_config().pg.steps, total,
                lab.pretrain_seconds, lab.pg_seconds);
  return {ok, detail};
}

bool bitwise_equal(const SampleBatch& a, const SampleBatch& b) {
  return a.dim == b.dim && a.rejected == b.rejected && a.values.size() == b.values.size() &&
         std::memcmp(a.values.data(), b.values.data(), a.values.size() * sizeof(double)) == 0;
}

Verdict degeneracy() {
  const VelocityModel& ref = lab.reference();
  const VelocityModel& theta = lab.policy_gradient();
  bool ok = true;
  std::string detail;
  for (Integrator integ : {Integrator::Euler, Integrator::Rk4, Integrator::EulerMaruyama}) {
    SamplerConfig sc = euler200(derive_seed(2, "degeneracy"));
    sc.integrator = integ;
    sc.batch_size = 5000;
    const bool w0 = bitwise_equal(sample({&ref, &theta}, rlg_at(0.0), sc), sample({&ref}, plain(), sc));
    const bool w1 = bitwise_equal(sample({&ref, &theta}, rlg_at(1.0), sc), sample({&theta}, plain(), sc));
    ok = ok && w0 && w1;
    detail += fmt("%s: w=0 %s, w=1 %s; ", std::string(to_string(integ)).c_str(), w0 ? "identical" : "differs",
                  w1 ? "identical" : "differs");
  }
  return {ok, detail};
}

Verdict oracle_cross_validation() {
  double worst = 0.0;
  for (double lambda : {0.05, 1.0 / 3.0, 2.0 / 3.0}) {
    const RewardFn r = RewardFn::linear(Point{lambda});
    const GaussianMixture closed = tilt_mixture(two_mode_mixture(), Point{lambda});
    worst = std::max(worst, total_variation(quadrature_tilt(two_mode_mixture(), r, 1.0), closed));
  }
  return {worst <= 1e-6, fmt("max TV over lambda in {0.05, 1/3, 2/3} = %.3e", worst)};
}

Verdict velocity_score_algebra() {
  double round_trip = 0.0, conversion = 0.0;
  Rng rng(derive_seed(4, "algebra"));
  for (const Schedule sched : {Schedule(ScheduleKind::RectifiedLinear), Schedule(ScheduleKind::VariancePreserving)}) {
    const GaussianPath path(Point{0.8, -1.1}, Point{0.3, 2.0}, sched);
    for (int i = 0; i < 1000; ++i) {
      const double t = 0.002 + 0.996 * i / 999.0;
      const Point x{3.0 * rng.normal(), 3.0 * rng.normal()};
      const Point s{rng.normal(), rng.normal()};
      const Point back = velocity_to_score(score_to_velocity(s, x, t, sched), x, t, sched);
      const Point v_from_s = score_to_velocity(path.score(x, t), x, t, sched);
      const Point s_from_v = velocity_to_score(path.velocity(x, t), x, t, sched);
      const Point v = path.velocity(x, t), sc = path.score(x, t);
      for (int k = 0; k < 2; ++k) {
        round_trip = std::max(round_trip, std::abs(back[k] - s[k]) / std::max(1.0, std::abs(s[k])));
        conversion = std::max(conversion, std::abs(v_from_s[k] - v[k]) / std::max(1.0, std::abs(v[k])));
        conversion = std::max(conversion, std::abs(s_from_v[k] - sc[k]) / std::max(1.0, std::abs(sc[k])));
      }
    }
  }
  return {round_trip <= 1e-10 && conversion <= 1e-8,
          fmt("round-trip max err %.2e, Gaussian-field conversion max err %.2e", round_trip, conversion)};
}

Verdict gradient_integrity() {
  Rng rng(derive_seed(5, "gradients"));
  double worst_param = 0.0, worst_input = 0.0;
  int failures = 0;
  const double h = 1e-5;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-3}); };
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 2;
    std::vector<std::size_t> hidden;
    const int depth = 1 + static_cast<int>(rng.engine()() % 3);
    for (int l = 0; l < depth; ++l) hidden.push_back(2 + rng.engine()() % 15);
    VelocityModel model = VelocityModel::glorot(dim, hidden, rng.engine()());
    Point x(dim), upstream(dim);
    for (int k = 0; k < dim; ++k) {
      x[k] = 2.0 * rng.normal();
      upstream[k] = rng.normal();
    }
    const double t = rng.uniform(0.0, 1.0);
    auto objective = [&](const VelocityModel& m, const Point& at) {
      const Point v = m.forward(at, t);
      double s = 0.0;
      for (int k = 0; k < dim; ++k) s += upstream[k] * v[k];
      return s;
    };
    std::vector<double> grads(model.parameter_count(), 0.0);
    model.grad_params(x, t, upstream, grads);
    bool ok = true;
    for (std::size_t p = 0; p < model.parameter_count(); ++p) {
      const double saved = model.parameters()[p];
      model.parameters()[p] = saved + h;
      const double up = objective(model, x);
      model.parameters()[p] = saved - h;
      const double down = objective(model, x);
      model.parameters()[p] = saved;
      const double e = rel(grads[p], (up - down) / (2 * h));
      worst_param = std::max(worst_param, e);
      ok = ok && e <= 1e-4;
    }
    const InputJacobian jac = model.grad_input(x, t);
    for (int c = 0; c < dim; ++c) {
      Point xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Point vp = model.forward(xp, t), vm = model.forward(xm, t);
      for (int r = 0; r < dim; ++r) {
        const double e = rel(jac.entries[r][c], (vp[r] - vm[r]) / (2 * h));
        worst_input = std::max(worst_input, e);
        ok = ok && e <= 1e-4;
      }
    }
    failures += ok ? 0 : 1;
  }
  return {failures == 0, fmt("100 configurations, %d failing; max relative error params %.2e, inputs %.2e", failures,
                             worst_param, worst_input)};
}

Verdict log_density_engine() {
  double worst = 0.0;
  const Schedule sched;
  const GaussianPath path(Point{1.5, -0.5}, Point{0.6, 1.8}, sched);
  LogDensityOptions opts;
  opts.steps = 1000;
  std::vector<double> xs;
  for (int i = 0; i < 25; ++i) {
    xs.push_back(-3.0 + 0.25 * i);
    xs.push_back(2.0 - 0.2 * i);
  }
  const auto lp = field_log_density(2, path, xs, opts);
  for (std::size_t s = 0; s < lp.size(); ++s)
    worst = std::max(worst, std::abs(lp[s] - path.log_pdf(Point{xs[2 * s], xs[2 * s + 1]}, 0.0)));

  std::vector<double> grid;
  for (int i = 0; i <= 640; ++i) grid.push_back(-8.0 + 0.025 * i);
  const auto model_lp = model_log_density(lab.reference(), grid, sched);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    integral += 0.5 * (std::exp(model_lp[i]) + std::exp(model_lp[i + 1])) * 0.025;
  return {worst <= 1e-4 && std::abs(integral - 1.0) <= 0.02,
          fmt("oracle max |dlogp| %.2e (1000 RK4 steps); trained density integral %.4f", worst, integral)};
}

Verdict optimal_policy_equivalence() {
  const VelocityModel& ref = lab.reference();
  const GaussianMixture target = tilt_mixture(two_mode_mixture(), linear_reward(), kBeta);
  FinetuneConfig fc;
  fc.method = FinetuneMethod::Rwr;
  fc.beta = kBeta;
  const auto start = Clock::now();
  const VelocityModel rwr = rwr_finetune(ref, linear_reward(), kBeta, fc).model;
  const double rwr_seconds = seconds_since(start);
  const double kl_rwr = histogram_kl(sample({&rwr}, plain(), euler200(derive_seed(7, "rwr"))), target);
  const double kl_pg =
      histogram_kl(sample({&lab.policy_gradient()}, plain(), euler200(derive_seed(7, "pg"))), target);
  return {kl_rwr <= 0.1 && kl_pg <= 0.1,
          fmt("rwr kl=%.4f (%.0fs), policy-gradient kl=%.4f", kl_rwr, rwr_seconds, kl_pg)};
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(a.size());
  mb /= static_cast<double>(b.size());
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

Verdict dpo_equivalence() {
  const VelocityModel& ref = lab.reference();
  const auto start = Clock::now();
  FinetuneConfig fc;
  fc.method = FinetuneMethod::Dpo;
  fc.beta = kBeta;
  const auto pairs = bradley_terry_pairs(ref, linear_reward(), 20000, derive_seed(8, "pairs"));
  const VelocityModel theta = dpo_finetune(ref, pairs, fc).model;
  std::vector<double> xs;
  for (int i = 0; i <= 40; ++i) xs.push_back(-4.0 + 0.2 * i);
  const auto implicit = implicit_reward(theta, ref, xs, 0.0, kBeta, Schedule{});
  std::vector<double> got, want;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = i + 1; j < xs.size(); ++j) {
      got.push_back(implicit[i] - implicit[j]);
      want.push_back(linear_reward()(Point{xs[i]}) - linear_reward()(Point{xs[j]}));
    }
  const double r = pearson(got, want);
  const double secs = seconds_since(start);
  return {r >= 0.95 && secs <= 1200.0, fmt("pearson %.4f over %zu pairwise differences, runtime %.0fs", r, got.size(), secs)};
}

Verdict implicit_reward_identity() {
  const VelocityModel& ref = lab.reference();
  const VelocityModel& theta = lab.policy_gradient();
  const double t = 0.5, h = 1e-3;
  double diff = 0.0, scale = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double x = -2.0 + 0.2 * i;
    const double analytic = implicit_reward_gradient(theta, ref, Point{x}, t, kBeta, Schedule{})[0];
    const auto r = implicit_reward(theta, ref, std::vector<double>{x - h, x + h}, t, kBeta, Schedule{}, 400);
    const double fd = (r[1] - r[0]) / (2 * h);
    diff = std::max(diff, std::abs(analytic - fd));
    scale = std::max(scale, std::abs(fd));
  }
  return {diff <= 5e-2 * scale, fmt("max |analytic - fd| = %.4f, max |fd| = %.4f, relative %.3f", diff, scale,
                                    diff / scale)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"guided sweep matches tilt", guided_sweep_matches_tilt},
      {"degeneracy exactness", degeneracy},
      {"oracle cross-validation", oracle_cross_validation},
      {"velocity-score algebra", velocity_score_algebra},
      {"gradient integrity", gradient_integrity},
      {"log-density engine", log_density_engine},
      {"optimal-policy equivalence", optimal_policy_equivalence},
      {"dpo equivalence", dpo_equivalence},
      {"implicit-reward identity", implicit_reward_identity},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
