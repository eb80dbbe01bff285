#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"
#include "rlg/net/checkpoint.hpp"
#include "rlg/net/mlp.hpp"
#include "rlg/net/optimizer.hpp"
#include "rlg/simd/kernels.hpp"

using namespace rlg;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1e-3, std::abs(a) + std::abs(b)); }

// Scalar functional of the network used by the finite-difference checks:
// f = <u, v(x,t)> + c * sum_k (d v_k / d x_k).
double functional(const VelocityModel& m, const Point& x, double t, const Point& u, double c) {
  const Point v = m.forward(x, t);
  double f = 0.0;
  for (int i = 0; i < x.dim(); ++i) f += u[i] * v[i];
  if (c != 0.0) f += c * m.grad_input(x, t).divergence;
  return f;
}

}  // namespace

TEST(Mlp, ParameterCount) {
  VelocityModel m(2, {16, 8});
  EXPECT_EQ(m.parameter_count(), (3u + 1) * 16 + (16u + 1) * 8 + (8u + 1) * 2);
  VelocityModel lin(1, {});
  EXPECT_EQ(lin.parameter_count(), 3u * 1);
}

TEST(Mlp, ZeroInitGivesZero) {
  VelocityModel m(2, {8, 8});
  const Point v = m.forward(Point{0.3, -1.0}, 0.4);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
}

TEST(Mlp, GlorotIsDeterministic) {
  const auto a = VelocityModel::glorot(1, {32, 32}, 42);
  const auto b = VelocityModel::glorot(1, {32, 32}, 42);
  const auto c = VelocityModel::glorot(1, {32, 32}, 43);
  EXPECT_EQ(checkpoint_text(a), checkpoint_text(b));
  EXPECT_NE(checkpoint_text(a), checkpoint_text(c));
  EXPECT_EQ(a.forward(Point{0.7}, 0.2), b.forward(Point{0.7}, 0.2));
}

TEST(Mlp, SingleLinearLayer) {
  VelocityModel m(2, {});
  auto p = m.parameters();
  // W = [[1, 2, 3], [4, 5, 6]], b = [0.5, -0.5]
  for (int i = 0; i < 6; ++i) p[static_cast<std::size_t>(i)] = i + 1.0;
  p[6] = 0.5;
  p[7] = -0.5;
  const Point v = m.forward(Point{1.0, -2.0}, 0.25);
  EXPECT_DOUBLE_EQ(v[0], 1.0 - 4.0 + 0.75 + 0.5);
  EXPECT_DOUBLE_EQ(v[1], 4.0 - 10.0 + 1.5 - 0.5);
  const auto jac = m.grad_input(Point{3.0, 1.0}, 0.9);
  EXPECT_EQ(jac.entries[0][0], 1.0);
  EXPECT_EQ(jac.entries[0][1], 2.0);
  EXPECT_EQ(jac.entries[1][0], 4.0);
  EXPECT_EQ(jac.entries[1][1], 5.0);
  EXPECT_EQ(jac.divergence, 6.0);
}

TEST(Mlp, BatchedForwardMatchesPointwise) {
  const auto m = VelocityModel::glorot(2, {16, 16}, 3);
  Rng rng(1);
  std::vector<double> xs(2 * 13), ts(13);
  for (double& x : xs) x = rng.normal();
  for (double& t : ts) t = rng.uniform();
  Tape tape;
  m.forward(xs, ts, tape);
  for (std::size_t s = 0; s < ts.size(); ++s) {
    const Point v = m.forward(Point{xs[2 * s], xs[2 * s + 1]}, ts[s]);
    EXPECT_EQ(tape.output()[2 * s], v[0]);
    EXPECT_EQ(tape.output()[2 * s + 1], v[1]);
  }
}

TEST(Mlp, OneDimensionalDivergenceIsJacobian) {
  const auto m = VelocityModel::glorot(1, {16}, 5);
  const auto jac = m.grad_input(Point{0.4}, 0.6);
  EXPECT_EQ(jac.divergence, jac.entries[0][0]);
}

TEST(Mlp, ParameterGradientMatchesFiniteDifferences) {
  Rng rng(77);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 2;
    auto m = VelocityModel::glorot(dim, {8, 8}, 1000 + static_cast<std::uint64_t>(trial));
    for (double& p : m.parameters()) p += 0.1 * rng.normal();
    Point x(dim), u(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = rng.normal();
      u[i] = rng.normal();
    }
    const double t = rng.uniform();
    std::vector<double> g(m.parameter_count(), 0.0);
    m.grad_params(x, t, u, g);
    const std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m.parameter_count()));
    const double h = 1e-5, keep = m.parameters()[k];
    m.parameters()[k] = keep + h;
    const double fp = functional(m, x, t, u, 0.0);
    m.parameters()[k] = keep - h;
    const double fm = functional(m, x, t, u, 0.0);
    m.parameters()[k] = keep;
    EXPECT_LE(rel_err(g[k], (fp - fm) / (2 * h)), 1e-4) << "trial " << trial << " param " << k;
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(Mlp, InputJacobianMatchesFiniteDifferences) {
  Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = 1 + trial % 2;
    const auto m = VelocityModel::glorot(dim, {8, 8}, 2000 + static_cast<std::uint64_t>(trial));
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = rng.normal();
    const double t = rng.uniform(), h = 1e-5;
    const auto jac = m.grad_input(x, t);
    for (int c = 0; c < dim; ++c) {
      Point xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Point vp = m.forward(xp, t), vm = m.forward(xm, t);
      for (int r = 0; r < dim; ++r) EXPECT_LE(rel_err(jac.entries[r][c], (vp[r] - vm[r]) / (2 * h)), 1e-4);
    }
  }
}

TEST(Mlp, BackwardInputGradientMatchesFiniteDifferences) {
  Rng rng(79);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = VelocityModel::glorot(2, {8, 8}, 3000 + static_cast<std::uint64_t>(trial));
    const Point x{rng.normal(), rng.normal()}, u{rng.normal(), rng.normal()};
    const double t = rng.uniform(), c = rng.normal(), h = 1e-5;
    Tape tape;
    const double ts[1] = {t};
    m.forward(x.coords(), ts, tape, true);
    const double gt[2] = {c, 0.0}, gt2[2] = {0.0, c};
    const std::span<const double> gtan[2] = {gt, gt2};
    std::vector<double> gp(m.parameter_count(), 0.0), gx(2, 0.0);
    m.backward(tape, u.coords(), gtan, gp, gx);
    for (int i = 0; i < 2; ++i) {
      Point xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      const double fd = (functional(m, xp, t, u, c) - functional(m, xm, t, u, c)) / (2 * h);
      EXPECT_LE(rel_err(gx[static_cast<std::size_t>(i)], fd), 1e-4);
    }
  }
}

TEST(Mlp, DivergenceParameterGradientMatchesFiniteDifferences) {
  Rng rng(80);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = 1 + trial % 2;
    auto m = VelocityModel::glorot(dim, {8, 8}, 4000 + static_cast<std::uint64_t>(trial));
    Point x(dim), u(dim);
    for (int i = 0; i < dim; ++i) {
      x[i] = rng.normal();
      u[i] = rng.normal();
    }
    const double t = rng.uniform(), c = rng.normal();
    Tape tape;
    const double ts[1] = {t};
    m.forward(x.coords(), ts, tape, true);
    std::vector<std::vector<double>> gbuf(static_cast<std::size_t>(dim), std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    std::vector<std::span<const double>> gtan;
    for (int k = 0; k < dim; ++k) {
      gbuf[static_cast<std::size_t>(k)][static_cast<std::size_t>(k)] = c;
      gtan.emplace_back(gbuf[static_cast<std::size_t>(k)]);
    }
    std::vector<double> g(m.parameter_count(), 0.0);
    m.backward(tape, u.coords(), gtan, g);
    const std::size_t k = static_cast<std::size_t>(rng.uniform() * static_cast<double>(m.parameter_count()));
    const double h = 1e-5, keep = m.parameters()[k];
    m.parameters()[k] = keep + h;
    const double fp = functional(m, x, t, u, c);
    m.parameters()[k] = keep - h;
    const double fm = functional(m, x, t, u, c);
    m.parameters()[k] = keep;
    EXPECT_LE(rel_err(g[k], (fp - fm) / (2 * h)), 1e-4) << "trial " << trial;
  }
}

TEST(Mlp, ZeroUpstreamGivesZeroGradient) {
  const auto m = VelocityModel::glorot(2, {8}, 9);
  std::vector<double> g(m.parameter_count(), 0.0);
  m.grad_params(Point{0.1, 0.2}, 0.3, Point{0.0, 0.0}, g);
  for (double v : g) EXPECT_EQ(v, 0.0);
}

TEST(Mlp, GradientIsLinearInUpstream) {
  const auto m = VelocityModel::glorot(2, {8, 8}, 10);
  const Point x{0.5, -0.2}, u{1.0, -2.0}, w{0.3, 0.7};
  const double a = 1.5, b = -0.5;
  std::vector<double> gu(m.parameter_count(), 0.0), gw(gu), gc(gu);
  m.grad_params(x, 0.4, u, gu);
  m.grad_params(x, 0.4, w, gw);
  m.grad_params(x, 0.4, lincomb(a, u, b, w), gc);
  for (std::size_t i = 0; i < gc.size(); ++i) EXPECT_NEAR(gc[i], a * gu[i] + b * gw[i], 1e-12);
}

TEST(Mlp, ScalarAndVectorBackendsAgree) {
  if (!simd::backend_supported(simd::Backend::Avx2)) GTEST_SKIP();
  const auto m = VelocityModel::glorot(1, {64, 64}, 11);
  Rng rng(2);
  std::vector<double> xs(50), ts(50), up(50);
  for (std::size_t i = 0; i < 50; ++i) {
    xs[i] = 3 * rng.normal();
    ts[i] = rng.uniform();
    up[i] = rng.normal();
  }
  const auto before = simd::active_backend();
  std::vector<double> out[2], grad[2];
  int slot = 0;
  for (auto b : {simd::Backend::Scalar, simd::Backend::Avx2}) {
    simd::set_backend(b);
    Tape tape;
    m.forward(xs, ts, tape);
    out[slot].assign(tape.output().begin(), tape.output().end());
    grad[slot].assign(m.parameter_count(), 0.0);
    m.backward(tape, up, {}, grad[slot]);
    ++slot;
  }
  simd::set_backend(before);
  for (std::size_t i = 0; i < out[0].size(); ++i) EXPECT_NEAR(out[1][i], out[0][i], 1e-13);
  for (std::size_t i = 0; i < grad[0].size(); ++i)
    EXPECT_NEAR(grad[1][i], grad[0][i], 1e-12 * std::max(1.0, std::abs(grad[0][i])));
}

TEST(Optimizer, SgdExample) {
  auto st = OptimizerState::sgd(1, 0.1);
  std::vector<double> p{1.0};
  const std::vector<double> g{2.0};
  optimizer_step(st, p, g);
  EXPECT_DOUBLE_EQ(p[0], 0.8);
}

TEST(Optimizer, AdamZeroGradient) {
  auto st = OptimizerState::adam(3, 1e-3);
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  optimizer_step(st, p, g);
  EXPECT_EQ(p, (std::vector<double>{1.0, -2.0, 3.0}));
  EXPECT_EQ(st.step, 1u);
}

TEST(Optimizer, AdamFirstStepByHand) {
  auto st = OptimizerState::adam(1, 0.01);
  std::vector<double> p{0.5};
  const std::vector<double> g{0.2};
  optimizer_step(st, p, g);
  const double m = 0.1 * 0.2, v = 0.001 * 0.04;
  const double mhat = m / (1 - 0.9), vhat = v / (1 - 0.999);
  EXPECT_NEAR(p[0], 0.5 - 0.01 * mhat / (std::sqrt(vhat) + 1e-8), 1e-15);
  EXPECT_NEAR(st.first_moment[0], m, 1e-17);
  EXPECT_NEAR(st.second_moment[0], v, 1e-19);
}

TEST(Optimizer, ShapeMismatch) {
  auto st = OptimizerState::adam(2, 0.01);
  std::vector<double> p{0.0, 0.0};
  const std::vector<double> g{1.0};
  try {
    optimizer_step(st, p, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  auto m = VelocityModel::glorot(2, {7, 5}, 99);
  m.parameters()[0] = 1.0 / 3.0;
  m.parameters()[1] = -1e-310;
  m.parameters()[2] = 6.02214076e23;
  std::stringstream ss;
  write_checkpoint(m, ss);
  const auto back = read_checkpoint(ss);
  ASSERT_TRUE(back.same_architecture(m));
  EXPECT_EQ(back.init_seed(), 99u);
  for (std::size_t i = 0; i < m.parameter_count(); ++i) EXPECT_EQ(back.parameters()[i], m.parameters()[i]);
  EXPECT_EQ(checkpoint_text(back), checkpoint_text(m));
}

TEST(Checkpoint, HeaderLayout) {
  const auto text = checkpoint_text(VelocityModel(1, {4}));
  EXPECT_EQ(text.rfind("# rlg-lab 0.1.0 seed=0\nRLG-CKPT 1\narch dim=1 hidden=4 activation=tanh\nseed 0\nlayer 0 2 4\n", 0), 0u);
}

TEST(Checkpoint, RejectsCorruptInput) {
  const auto good = checkpoint_text(VelocityModel::glorot(1, {3}, 1));
  for (const std::string& bad : {std::string("RLG-CKPT 2\n"), good.substr(0, good.size() / 2),
                                good.substr(0, good.rfind("end")), std::string("")}) {
    std::istringstream in(bad);
    try {
      read_checkpoint(in);
      FAIL() << "accepted: " << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::Parse);
    }
  }
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/x.ckpt"), Error);
}

TEST(Checkpoint, FormatDoubleRoundTrips) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, 20 * rng.uniform() - 10);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_THROW(parse_double("1.0x"), Error);
}
