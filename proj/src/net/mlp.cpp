#include "rlg/net/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "rlg/error.hpp"
#include "rlg/simd/kernels.hpp"

namespace rlg {

VelocityModel::VelocityModel(int dim, std::vector<std::size_t> hidden) : dim_(dim), hidden_(std::move(hidden)) {
  if (dim < 1 || dim > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "model dimension must be 1 or 2");
  for (std::size_t w : hidden_)
    if (w == 0) throw Error(ErrorCode::InvalidArgument, "hidden layer width must be positive");
  build_layout();
}

void VelocityModel::build_layout() {
  layers_.clear();
  std::size_t fan_in = input_dim();
  std::size_t offset = 0;
  auto add = [&](std::size_t fan_out) {
    layers_.push_back({fan_in, fan_out, offset, offset + fan_in * fan_out});
    offset += (fan_in + 1) * fan_out;
    fan_in = fan_out;
  };
  for (std::size_t w : hidden_) add(w);
  add(static_cast<std::size_t>(dim_));
  params_.assign(offset, 0.0);
}

VelocityModel VelocityModel::glorot(int dim, std::vector<std::size_t> hidden, std::uint64_t seed) {
  VelocityModel m(dim, std::move(hidden));
  m.seed_ = seed;
  std::mt19937_64 engine(seed);
  for (const auto& layer : m.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.fan_in + layer.fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < layer.fan_in * layer.fan_out; ++i) m.params_[layer.weight_offset + i] = dist(engine);
  }
  return m;
}

void VelocityModel::forward(std::span<const double> xs, std::span<const double> ts, Tape& tape,
                            bool with_tangents) const {
  const std::size_t n = ts.size();
  const std::size_t d = static_cast<std::size_t>(dim_);
  if (xs.size() != n * d) throw Error(ErrorCode::DimensionMismatch, "forward: xs must hold n x dim values");
  const auto& k = simd::kernels();
  const std::size_t L = layers_.size();
  const std::size_t in0 = input_dim();

  tape.n_ = n;
  tape.act_.resize(L + 1);
  auto& a0 = tape.act_[0];
  a0.resize(n * in0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t i = 0; i < d; ++i) {
      const double v = xs[s * d + i];
      if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "forward: non-finite coordinate");
      a0[s * in0 + i] = v;
    }
    if (!std::isfinite(ts[s])) throw Error(ErrorCode::NonFinite, "forward: non-finite time");
    a0[s * in0 + d] = ts[s];
  }

  for (std::size_t l = 0; l < L; ++l) {
    const auto& ly = layers_[l];
    auto& out = tape.act_[l + 1];
    out.resize(n * ly.fan_out);
    k.affine(tape.act_[l].data(), n, ly.fan_in, params_.data() + ly.weight_offset, params_.data() + ly.bias_offset,
             ly.fan_out, out.data());
    if (l + 1 < L) k.tanh_inplace(out.data(), out.size());
  }

  const int T = with_tangents ? dim_ : 0;
  tape.tangents_ = T;
  tape.tan_.resize(static_cast<std::size_t>(T));
  tape.ztan_.resize(static_cast<std::size_t>(T));
  for (std::size_t kk = 0; kk < static_cast<std::size_t>(T); ++kk) {
    auto& tan = tape.tan_[kk];
    auto& ztan = tape.ztan_[kk];
    tan.resize(L + 1);
    ztan.resize(L);
    tan[0].assign(n * in0, 0.0);
    for (std::size_t s = 0; s < n; ++s) tan[0][s * in0 + kk] = 1.0;
    for (std::size_t l = 0; l < L; ++l) {
      const auto& ly = layers_[l];
      auto& z = ztan[l];
      z.resize(n * ly.fan_out);
      k.affine(tan[l].data(), n, ly.fan_in, params_.data() + ly.weight_offset, nullptr, ly.fan_out, z.data());
      auto& next = tan[l + 1];
      next.resize(n * ly.fan_out);
      if (l + 1 < L) {
        const auto& h = tape.act_[l + 1];
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = (1.0 - h[i] * h[i]) * z[i];
      } else {
        std::copy(z.begin(), z.end(), next.begin());
      }
    }
  }
}

void VelocityModel::backward(Tape& tape, std::span<const double> g_out,
                             std::span<const std::span<const double>> g_tangent, std::span<double> grads,
                             std::span<double> grad_x) const {
  const std::size_t n = tape.n_;
  const std::size_t d = static_cast<std::size_t>(dim_);
  if (grads.size() != params_.size()) throw Error(ErrorCode::ShapeMismatch, "backward: gradient buffer size");
  if (g_out.size() != n * d) throw Error(ErrorCode::ShapeMismatch, "backward: upstream size");
  const std::size_t T = g_tangent.size();
  if (T > static_cast<std::size_t>(tape.tangents_))
    throw Error(ErrorCode::ShapeMismatch, "backward: tangent upstream without forward tangents");
  for (const auto& gt : g_tangent)
    if (gt.size() != n * d) throw Error(ErrorCode::ShapeMismatch, "backward: tangent upstream size");
  if (!grad_x.empty() && grad_x.size() != n * d) throw Error(ErrorCode::ShapeMismatch, "backward: grad_x size");

  const auto& k = simd::kernels();
  const std::size_t L = layers_.size();
  auto& g = tape.g_;
  auto& g_prev = tape.g_prev_;
  auto& gt = tape.gt_;
  auto& gt_prev = tape.gt_prev_;
  g.assign(g_out.begin(), g_out.end());
  gt.resize(T);
  gt_prev.resize(T);
  for (std::size_t kk = 0; kk < T; ++kk) gt[kk].assign(g_tangent[kk].begin(), g_tangent[kk].end());

  for (std::size_t li = L; li-- > 0;) {
    const auto& ly = layers_[li];
    if (li + 1 < L) {
      // tanh layer: convert grads w.r.t. (h, h_dot) into grads w.r.t. (z, z_dot).
      const auto& h = tape.act_[li + 1];
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double deriv = 1.0 - h[i] * h[i];
        double gz = g[i] * deriv;
        for (std::size_t kk = 0; kk < T; ++kk) {
          gz += gt[kk][i] * tape.ztan_[kk][li][i] * (-2.0 * h[i] * deriv);
          gt[kk][i] *= deriv;
        }
        g[i] = gz;
      }
    }
    double* gw = grads.data() + ly.weight_offset;
    double* gb = grads.data() + ly.bias_offset;
    k.accumulate_weight_grad(g.data(), n, ly.fan_out, tape.act_[li].data(), ly.fan_in, gw, gb);
    for (std::size_t kk = 0; kk < T; ++kk)
      k.accumulate_weight_grad(gt[kk].data(), n, ly.fan_out, tape.tan_[kk][li].data(), ly.fan_in, gw, nullptr);

    if (li == 0 && grad_x.empty()) break;
    const double* w = params_.data() + ly.weight_offset;
    g_prev.resize(n * ly.fan_in);
    k.affine_backward_input(g.data(), n, ly.fan_out, w, ly.fan_in, g_prev.data());
    std::swap(g, g_prev);
    for (std::size_t kk = 0; kk < T; ++kk) {
      gt_prev[kk].resize(n * ly.fan_in);
      k.affine_backward_input(gt[kk].data(), n, ly.fan_out, w, ly.fan_in, gt_prev[kk].data());
      std::swap(gt[kk], gt_prev[kk]);
    }
  }

  if (!grad_x.empty()) {
    const std::size_t in0 = input_dim();
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t i = 0; i < d; ++i) grad_x[s * d + i] = g[s * in0 + i];
  }
}

Point VelocityModel::forward(const Point& x, double t) const {
  if (x.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "forward: point dimension");
  Tape tape;
  const double ts[1] = {t};
  forward(x.coords(), ts, tape);
  return Point::from(tape.output());
}

void VelocityModel::grad_params(const Point& x, double t, const Point& upstream, std::span<double> grads) const {
  if (x.dim() != dim_ || upstream.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "grad_params: dimension");
  Tape tape;
  const double ts[1] = {t};
  forward(x.coords(), ts, tape);
  backward(tape, upstream.coords(), {}, grads);
}

InputJacobian VelocityModel::grad_input(const Point& x, double t) const {
  if (x.dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "grad_input: point dimension");
  Tape tape;
  const double ts[1] = {t};
  forward(x.coords(), ts, tape, true);
  InputJacobian jac;
  jac.dim = dim_;
  for (int c = 0; c < dim_; ++c) {
    const auto col = tape.output_tangent(c);
    for (int r = 0; r < dim_; ++r) jac.entries[r][c] = col[static_cast<std::size_t>(r)];
  }
  for (int i = 0; i < dim_; ++i) jac.divergence += jac.entries[i][i];
  return jac;
}

}  // namespace rlg
