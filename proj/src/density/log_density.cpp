#include "rlg/density/log_density.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rlg/density/mixture.hpp"
#include "rlg/error.hpp"

namespace rlg {

namespace {

class FieldEvaluator {
 public:
  explicit FieldEvaluator(const VelocityModel& model) : model_(model), d_(static_cast<std::size_t>(model.dim())) {}

  // v (n x d) and div v (n) at time t.
  void eval(std::span<const double> xs, double t, std::vector<double>& v, std::vector<double>& div) {
    const std::size_t n = xs.size() / d_;
    ts_.assign(n, t);
    model_.forward(xs, ts_, tape_, true);
    const auto out = tape_.output();
    v.assign(out.begin(), out.end());
    div.assign(n, 0.0);
    for (std::size_t k = 0; k < d_; ++k) {
      const auto tk = tape_.output_tangent(static_cast<int>(k));
      for (std::size_t s = 0; s < n; ++s) div[s] += tk[s * d_ + k];
    }
  }

  // Vector-Jacobian product of (v, div v) at (xs, t) with upstream (gv, gdiv):
  // parameter part added into grads, state part written to gx.
  void vjp(std::span<const double> xs, double t, std::span<const double> gv, std::span<const double> gdiv,
           std::span<double> grads, std::vector<double>& gx) {
    const std::size_t n = xs.size() / d_;
    ts_.assign(n, t);
    model_.forward(xs, ts_, tape_, true);
    gtan_.resize(d_);
    std::vector<std::span<const double>> views;
    for (std::size_t k = 0; k < d_; ++k) {
      gtan_[k].assign(n * d_, 0.0);
      for (std::size_t s = 0; s < n; ++s) gtan_[k][s * d_ + k] = gdiv[s];
      views.emplace_back(gtan_[k]);
    }
    gx.resize(n * d_);
    model_.backward(tape_, gv, views, grads, gx);
  }

 private:
  const VelocityModel& model_;
  std::size_t d_;
  Tape tape_;
  std::vector<double> ts_;
  std::vector<std::vector<double>> gtan_;
};

void check_options(const LogDensityOptions& opts) {
  if (opts.steps < 100) throw Error(ErrorCode::InvalidArgument, "log-density integration needs >= 100 steps");
  if (!(opts.t_start >= 0.0 && opts.t_start < 1.0))
    throw Error(ErrorCode::InvalidArgument, "log-density start time must lie in [0, 1)");
}

void check_inputs(const VelocityModel& model, std::span<const double> xs, const LogDensityOptions& opts) {
  check_options(opts);
  if (xs.size() % static_cast<std::size_t>(model.dim()) != 0)
    throw Error(ErrorCode::DimensionMismatch, "log-density: xs is not n x dim");
}

void check_escape(std::span<const double> xs, double radius) {
  for (double v : xs)
    if (!(std::abs(v) <= radius))
      throw Error(ErrorCode::Divergence, "log-density trajectory left [-" + std::to_string(radius) + ", " +
                                             std::to_string(radius) + "]");
}

// y = x + a * k
void offset(std::span<const double> x, double a, std::span<const double> k, std::vector<double>& y) {
  y.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + a * k[i];
}

std::vector<double> terminal_log_density(std::span<const double> x, std::span<const double> accum, std::size_t d) {
  const std::size_t n = accum.size();
  std::vector<double> out(n);
  for (std::size_t s = 0; s < n; ++s) out[s] = accum[s] + standard_normal_log_pdf(x.subspan(s * d, d));
  return out;
}

}  // namespace

std::vector<double> field_log_density(int dim, const DivergenceField& field, std::span<const double> xs,
                                      const LogDensityOptions& opts) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::InvalidArgument, "field_log_density: bad dimension");
  check_options(opts);
  const std::size_t d = static_cast<std::size_t>(dim);
  if (xs.size() % d != 0) throw Error(ErrorCode::DimensionMismatch, "log-density: xs is not n x dim");
  const std::size_t n = xs.size() / d;
  const double h = (1.0 - opts.t_start) / static_cast<double>(opts.steps);

  std::vector<double> x(xs.begin(), xs.end()), y, logdet(n, 0.0);
  std::vector<double> k1, k2, k3, k4, l1, l2, l3, l4;
  check_escape(x, opts.escape_radius);
  for (std::size_t step = 0; step < opts.steps; ++step) {
    const double t = opts.t_start + h * static_cast<double>(step);
    field(x, t, k1, l1);
    offset(x, 0.5 * h, k1, y);
    check_escape(y, opts.escape_radius);
    field(y, t + 0.5 * h, k2, l2);
    offset(x, 0.5 * h, k2, y);
    check_escape(y, opts.escape_radius);
    field(y, t + 0.5 * h, k3, l3);
    offset(x, h, k3, y);
    check_escape(y, opts.escape_radius);
    field(y, t + h, k4, l4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (std::size_t s = 0; s < n; ++s) logdet[s] += h / 6.0 * (l1[s] + 2.0 * l2[s] + 2.0 * l3[s] + l4[s]);
    check_escape(x, opts.escape_radius);
  }
  return terminal_log_density(x, logdet, d);
}

std::vector<double> model_log_density(const VelocityModel& model, std::span<const double> xs, const Schedule& sched,
                                      const LogDensityOptions& opts) {
  (void)sched;
  check_inputs(model, xs, opts);
  FieldEvaluator evaluator(model);
  return field_log_density(
      model.dim(),
      [&evaluator](std::span<const double> x, double t, std::vector<double>& v, std::vector<double>& div) {
        evaluator.eval(x, t, v, div);
      },
      xs, opts);
}

double model_log_density(const VelocityModel& model, const Point& x, const Schedule& sched, std::size_t steps) {
  if (x.dim() != model.dim()) throw Error(ErrorCode::DimensionMismatch, "model_log_density: point dimension");
  LogDensityOptions opts;
  opts.steps = steps;
  return model_log_density(model, x.coords(), sched, opts).front();
}

std::vector<double> model_log_density_with_grad(const VelocityModel& model, std::span<const double> xs,
                                                const Schedule& sched, const LogDensityOptions& opts,
                                                std::span<const double> weights, std::span<double> grads) {
  (void)sched;
  check_inputs(model, xs, opts);
  const std::size_t d = static_cast<std::size_t>(model.dim());
  const std::size_t n = xs.size() / d;
  if (weights.size() != n) throw Error(ErrorCode::ShapeMismatch, "log-density gradient weights");
  const std::size_t N = opts.steps;
  const double h = (1.0 - opts.t_start) / static_cast<double>(N);

  // Forward solve, keeping the four stage inputs of every step.
  FieldEvaluator field(model);
  std::vector<std::vector<double>> stages(4 * N);
  std::vector<double> x(xs.begin(), xs.end()), logdet(n, 0.0);
  std::vector<double> k1, k2, k3, k4, l1, l2, l3, l4;
  check_escape(x, opts.escape_radius);
  for (std::size_t step = 0; step < N; ++step) {
    const double t = opts.t_start + h * static_cast<double>(step);
    auto& y1 = stages[4 * step];
    auto& y2 = stages[4 * step + 1];
    auto& y3 = stages[4 * step + 2];
    auto& y4 = stages[4 * step + 3];
    y1 = x;
    field.eval(y1, t, k1, l1);
    offset(x, 0.5 * h, k1, y2);
    check_escape(y2, opts.escape_radius);
    field.eval(y2, t + 0.5 * h, k2, l2);
    offset(x, 0.5 * h, k2, y3);
    check_escape(y3, opts.escape_radius);
    field.eval(y3, t + 0.5 * h, k3, l3);
    offset(x, h, k3, y4);
    check_escape(y4, opts.escape_radius);
    field.eval(y4, t + h, k4, l4);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (std::size_t s = 0; s < n; ++s) logdet[s] += h / 6.0 * (l1[s] + 2.0 * l2[s] + 2.0 * l3[s] + l4[s]);
    check_escape(x, opts.escape_radius);
  }
  auto result = terminal_log_density(x, logdet, d);

  // Adjoint sweep. The accumulated log-det enters the output with unit weight
  // at every step, so its adjoint stays equal to `weights` throughout.
  std::vector<double> adj(n * d);
  for (std::size_t s = 0; s < n; ++s)
    for (std::size_t i = 0; i < d; ++i) adj[s * d + i] = -weights[s] * x[s * d + i];

  std::vector<double> gk(n * d), gl(n), gy1, gy2, gy3, gy4;
  const double c1 = h / 6.0, c2 = 2.0 * h / 6.0;
  for (std::size_t step = N; step-- > 0;) {
    const double t = opts.t_start + h * static_cast<double>(step);
    for (std::size_t s = 0; s < n; ++s) gl[s] = c1 * weights[s];
    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = c1 * adj[i];
    field.vjp(stages[4 * step + 3], t + h, gk, gl, grads, gy4);

    for (std::size_t s = 0; s < n; ++s) gl[s] = c2 * weights[s];
    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = c2 * adj[i] + h * gy4[i];
    field.vjp(stages[4 * step + 2], t + 0.5 * h, gk, gl, grads, gy3);

    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = c2 * adj[i] + 0.5 * h * gy3[i];
    field.vjp(stages[4 * step + 1], t + 0.5 * h, gk, gl, grads, gy2);

    for (std::size_t s = 0; s < n; ++s) gl[s] = c1 * weights[s];
    for (std::size_t i = 0; i < gk.size(); ++i) gk[i] = c1 * adj[i] + 0.5 * h * gy2[i];
    field.vjp(stages[4 * step], t, gk, gl, grads, gy1);

    for (std::size_t i = 0; i < adj.size(); ++i) adj[i] += gy1[i] + gy2[i] + gy3[i] + gy4[i];
  }
  return result;
}

std::vector<double> implicit_reward(const VelocityModel& theta, const VelocityModel& ref, std::span<const double> xs,
                                    double t, double beta, const Schedule& sched, std::size_t steps) {
  if (theta.dim() != ref.dim())
    throw Error(ErrorCode::DimensionMismatch, "implicit_reward: models differ in dimension");
  LogDensityOptions opts;
  opts.steps = steps;
  opts.t_start = t;
  const auto lt = model_log_density(theta, xs, sched, opts);
  const auto lr = model_log_density(ref, xs, sched, opts);
  std::vector<double> out(lt.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = beta * (lt[i] - lr[i]);
  return out;
}

double implicit_reward(const VelocityModel& theta, const VelocityModel& ref, const Point& x, double t, double beta,
                       const Schedule& sched, std::size_t steps) {
  if (x.dim() != theta.dim()) throw Error(ErrorCode::DimensionMismatch, "implicit_reward: point dimension");
  return implicit_reward(theta, ref, x.coords(), t, beta, sched, steps).front();
}


GaussianPath::GaussianPath(Point mean, Point variance, Schedule sched)
    : mean_(mean), var_(variance), sched_(sched) {
  require_same_dim(mean_, var_, "GaussianPath");
  for (int i = 0; i < var_.dim(); ++i)
    if (!(var_[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "GaussianPath: variance must be positive");
}

double GaussianPath::marginal_variance(int i, double t) const {
  const double a = sched_.alpha(t), b = sched_.beta(t);
  return a * a * var_[i] + b * b;
}

Point GaussianPath::velocity(const Point& x, double t) const {
  require_same_dim(x, mean_, "GaussianPath::velocity");
  const double a = sched_.alpha(t), b = sched_.beta(t), ad = sched_.alpha_dot(t), bd = sched_.beta_dot(t);
  Point v(x.dim());
  for (int i = 0; i < x.dim(); ++i) {
    const double gain = (a * ad * var_[i] + b * bd) / marginal_variance(i, t);
    v[i] = ad * mean_[i] + gain * (x[i] - a * mean_[i]);
  }
  return v;
}

double GaussianPath::divergence(double t) const {
  const double a = sched_.alpha(t), b = sched_.beta(t), ad = sched_.alpha_dot(t), bd = sched_.beta_dot(t);
  double div = 0.0;
  for (int i = 0; i < mean_.dim(); ++i) div += (a * ad * var_[i] + b * bd) / marginal_variance(i, t);
  return div;
}

Point GaussianPath::score(const Point& x, double t) const {
  require_same_dim(x, mean_, "GaussianPath::score");
  const double a = sched_.alpha(t);
  Point s(x.dim());
  for (int i = 0; i < x.dim(); ++i) s[i] = -(x[i] - a * mean_[i]) / marginal_variance(i, t);
  return s;
}

double GaussianPath::log_pdf(const Point& x, double t) const {
  require_same_dim(x, mean_, "GaussianPath::log_pdf");
  const double a = sched_.alpha(t);
  double lp = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    const double var = marginal_variance(i, t);
    const double r = x[i] - a * mean_[i];
    lp += -0.5 * r * r / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
  }
  return lp;
}

void GaussianPath::operator()(std::span<const double> xs, double t, std::vector<double>& v,
                              std::vector<double>& div) const {
  const std::size_t d = static_cast<std::size_t>(mean_.dim());
  const std::size_t n = xs.size() / d;
  v.resize(xs.size());
  div.assign(n, divergence(t));
  for (std::size_t s = 0; s < n; ++s) {
    const Point p = velocity(Point::from(xs.subspan(s * d, d)), t);
    for (std::size_t i = 0; i < d; ++i) v[s * d + i] = p[static_cast<int>(i)];
  }
}

}  // namespace rlg
