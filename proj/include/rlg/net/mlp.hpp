#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rlg/core/point.hpp"

namespace rlg {

struct LayerShape {
  std::size_t fan_in;
  std::size_t fan_out;
  std::size_t weight_offset;  // row-major [fan_out x fan_in]
  std::size_t bias_offset;
};

// Per-batch activation storage. Optionally carries forward-mode tangents along
// each input coordinate, which is how exact Jacobians and divergences are formed.
class Tape {
 public:
  std::size_t batch() const noexcept { return n_; }
  int tangents() const noexcept { return tangents_; }
  // n x dim outputs of the last forward pass.
  std::span<const double> output() const noexcept { return act_.back(); }
  // n x dim derivative of the output along input coordinate k.
  std::span<const double> output_tangent(int k) const noexcept { return tan_[static_cast<std::size_t>(k)].back(); }

 private:
  friend class VelocityModel;
  std::size_t n_ = 0;
  int tangents_ = 0;
  std::vector<std::vector<double>> act_;                // act_[l]: n x width(l)
  std::vector<std::vector<std::vector<double>>> tan_;   // tan_[k][l]
  std::vector<std::vector<std::vector<double>>> ztan_;  // pre-activation tangents of hidden layers
  std::vector<double> g_, g_prev_;
  std::vector<std::vector<double>> gt_, gt_prev_;
};

struct InputJacobian {
  int dim = 1;
  double entries[kMaxDim][kMaxDim] = {};  // entries[row = output][col = input]
  double divergence = 0.0;
};

// Velocity field v(x, t): tanh MLP on the concatenation [x, t].
class VelocityModel {
 public:
  VelocityModel() = default;
  // Zero-initialized parameters.
  VelocityModel(int dim, std::vector<std::size_t> hidden);
  // Uniform +-sqrt(6 / (fan_in + fan_out)) weights, zero biases.
  static VelocityModel glorot(int dim, std::vector<std::size_t> hidden, std::uint64_t seed);

  int dim() const noexcept { return dim_; }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(dim_) + 1; }
  const std::vector<std::size_t>& hidden() const noexcept { return hidden_; }
  const std::vector<LayerShape>& layers() const noexcept { return layers_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::uint64_t init_seed() const noexcept { return seed_; }
  void set_init_seed(std::uint64_t s) noexcept { seed_ = s; }

  bool same_architecture(const VelocityModel& other) const noexcept {
    return dim_ == other.dim_ && hidden_ == other.hidden_;
  }

  // Batched forward of n points (xs is n x dim, ts has n entries). With
  // with_tangents, the tape also holds d(output)/d(x_k) for every k.
  void forward(std::span<const double> xs, std::span<const double> ts, Tape& tape, bool with_tangents = false) const;

  // Reverse pass over the last forward on `tape`. Adds d/dtheta of
  //   sum_s <g_out[s], out[s]> + sum_k sum_s <g_tangent[k][s], tangent_k[s]>
  // into grads; g_tangent may be empty. When grad_x is non-empty it receives
  // the same derivative with respect to xs (n x dim).
  void backward(Tape& tape, std::span<const double> g_out, std::span<const std::span<const double>> g_tangent,
                std::span<double> grads, std::span<double> grad_x = {}) const;

  Point forward(const Point& x, double t) const;
  void grad_params(const Point& x, double t, const Point& upstream, std::span<double> grads) const;
  InputJacobian grad_input(const Point& x, double t) const;

 private:
  void build_layout();

  int dim_ = 1;
  std::vector<std::size_t> hidden_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
  std::uint64_t seed_ = 0;
};

}  // namespace rlg
