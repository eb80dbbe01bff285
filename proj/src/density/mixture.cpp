#include "rlg/density/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rlg/core/random.hpp"
#include "rlg/error.hpp"

namespace rlg {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2 pi)

double component_log_pdf(const GaussianComponent& c, const Point& x) {
  double acc = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    const double diff = x[i] - c.mean[i];
    acc += -0.5 * (kLog2Pi + std::log(c.variance[i]) + diff * diff / c.variance[i]);
  }
  return acc;
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "mixture needs at least one component");
  const int d = components_.front().mean.dim();
  double total = 0.0;
  for (const auto& c : components_) {
    if (c.mean.dim() != d || c.variance.dim() != d)
      throw Error(ErrorCode::DimensionMismatch, "mixture components must share one dimension");
    if (!(c.weight > 0.0) || !std::isfinite(c.weight))
      throw Error(ErrorCode::InvalidArgument, "mixture weights must be positive");
    if (!c.mean.finite()) throw Error(ErrorCode::NonFinite, "mixture mean");
    for (int i = 0; i < d; ++i)
      if (!(c.variance[i] > 0.0) || !std::isfinite(c.variance[i]))
        throw Error(ErrorCode::InvalidArgument, "mixture variances must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::InvalidArgument, "mixture weights must sum to 1");
}

GaussianMixture GaussianMixture::standard_normal(int dim) {
  Point mean(dim), var(dim);
  for (int i = 0; i < dim; ++i) var[i] = 1.0;
  return GaussianMixture({{1.0, mean, var}});
}

GaussianMixture GaussianMixture::two_mode_demo() {
  return GaussianMixture({{0.7, Point{-2.5}, Point{0.25}}, {0.3, Point{2.5}, Point{0.49}}});
}

double GaussianMixture::log_pdf(const Point& x) const {
  if (x.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "mixture log_pdf");
  double hi = -INFINITY;
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    terms.push_back(std::log(c.weight) + component_log_pdf(c, x));
    hi = std::max(hi, terms.back());
  }
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

double GaussianMixture::pdf(const Point& x) const { return std::exp(log_pdf(x)); }

Point GaussianMixture::score(const Point& x) const {
  if (x.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "mixture score");
  std::vector<double> logw;
  double hi = -INFINITY;
  for (const auto& c : components_) {
    logw.push_back(std::log(c.weight) + component_log_pdf(c, x));
    hi = std::max(hi, logw.back());
  }
  double norm = 0.0;
  for (double& l : logw) norm += (l = std::exp(l - hi));
  Point s(x.dim());
  for (std::size_t k = 0; k < components_.size(); ++k) {
    const double r = logw[k] / norm;
    for (int i = 0; i < x.dim(); ++i) s[i] += r * (components_[k].mean[i] - x[i]) / components_[k].variance[i];
  }
  return s;
}

SampleBatch GaussianMixture::sample(std::size_t n, std::uint64_t seed) const {
  Rng rng(seed);
  return sample(n, rng);
}

SampleBatch GaussianMixture::sample(std::size_t n, Rng& rng) const {
  SampleBatch batch;
  batch.dim = dim();
  batch.values.reserve(n * static_cast<std::size_t>(dim()));
  std::vector<double> weights;
  for (const auto& c : components_) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  for (std::size_t s = 0; s < n; ++s) {
    const auto& c = components_[pick(rng.engine())];
    for (int i = 0; i < dim(); ++i) batch.values.push_back(c.mean[i] + std::sqrt(c.variance[i]) * rng.normal());
  }
  return batch;
}

double GaussianMixture::cdf(double x) const {
  if (dim() != 1) throw Error(ErrorCode::Unsupported, "mixture cdf is 1-D only");
  double acc = 0.0;
  for (const auto& c : components_)
    acc += c.weight * 0.5 * std::erfc(-(x - c.mean[0]) / std::sqrt(2.0 * c.variance[0]));
  return acc;
}

double GaussianMixture::mean1d() const {
  if (dim() != 1) throw Error(ErrorCode::Unsupported, "mixture mean1d is 1-D only");
  double acc = 0.0;
  for (const auto& c : components_) acc += c.weight * c.mean[0];
  return acc;
}

double mixture_log_pdf(const GaussianMixture& m, const Point& x) { return m.log_pdf(x); }
Point mixture_score(const GaussianMixture& m, const Point& x) { return m.score(x); }
SampleBatch mixture_sample(const GaussianMixture& m, std::size_t n, std::uint64_t seed) { return m.sample(n, seed); }

double standard_normal_log_pdf(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += -0.5 * (kLog2Pi + v * v);
  return acc;
}

}  // namespace rlg
