#pragma once

#include <cstdint>
#include <vector>

#include "rlg/core/point.hpp"
#include "rlg/core/random.hpp"
#include "rlg/core/sample_batch.hpp"

namespace rlg {

// Axis-aligned Gaussian component; `variance` holds one variance per dimension.
struct GaussianComponent {
  double weight;
  Point mean;
  Point variance;
};

class GaussianMixture {
 public:
  // Validates weights (positive, summing to 1 within 1e-12), variances and dimensions.
  explicit GaussianMixture(std::vector<GaussianComponent> components);

  static GaussianMixture standard_normal(int dim = 1);
  // 0.7 N(-2.5, 0.25) + 0.3 N(2.5, 0.49), variances as given.
  static GaussianMixture two_mode_demo();

  int dim() const noexcept { return components_.front().mean.dim(); }
  const std::vector<GaussianComponent>& components() const noexcept { return components_; }

  double log_pdf(const Point& x) const;
  double pdf(const Point& x) const;
  Point score(const Point& x) const;
  SampleBatch sample(std::size_t n, std::uint64_t seed) const;
  SampleBatch sample(std::size_t n, Rng& rng) const;

  // 1-D only.
  double cdf(double x) const;
  double mean1d() const;

 private:
  std::vector<GaussianComponent> components_;
};

double mixture_log_pdf(const GaussianMixture& m, const Point& x);
Point mixture_score(const GaussianMixture& m, const Point& x);
SampleBatch mixture_sample(const GaussianMixture& m, std::size_t n, std::uint64_t seed);

double standard_normal_log_pdf(std::span<const double> x);

}  // namespace rlg
