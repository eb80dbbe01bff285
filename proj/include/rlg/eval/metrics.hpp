#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "rlg/core/sample_batch.hpp"
#include "rlg/density/mixture.hpp"
#include "rlg/density/tilt.hpp"

namespace rlg {

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;  // counts.size() == edges.size() - 1
  std::size_t total = 0;            // samples offered, in or out of range
  std::size_t overflow = 0;         // samples outside [edges.front(), edges.back())
};

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins);

// Bins are half-open [e_i, e_{i+1}); the last bin also includes its upper edge.
Histogram make_histogram(std::span<const double> samples, const std::vector<double>& edges);

struct PointMass {
  double at;
};

// Comparison density for 1-D metrics.
class ReferenceDensity {
 public:
  ReferenceDensity(GaussianMixture m) : impl_(std::move(m)) {}  // NOLINT(google-explicit-constructor)
  ReferenceDensity(TabulatedDensity t) : impl_(std::move(t)) {}  // NOLINT(google-explicit-constructor)
  ReferenceDensity(PointMass p) : impl_(p) {}                    // NOLINT(google-explicit-constructor)

  double cdf(double x) const;
  double mass(double lo, double hi) const { return cdf(hi) - cdf(lo); }

 private:
  std::variant<GaussianMixture, TabulatedDensity, PointMass> impl_;
};

struct KlOptions {
  std::size_t bins = 128;
  double lo = -8.0;
  double hi = 8.0;
  std::size_t min_samples = 1000;
};

// sum_i p_i ln(p_i / q_i): p_i = bin count / sample count, q_i the reference
// mass of the bin clamped below at 1e-12; empty bins contribute nothing.
double histogram_kl(const SampleBatch& samples, const ReferenceDensity& density, const KlOptions& opts = {});
double histogram_kl(const Histogram& hist, const ReferenceDensity& density);

// integral |F_hat - F| over the grid by the trapezoid rule. 1-D only.
double wasserstein1(const SampleBatch& samples, const ReferenceDensity& density, const Grid1D& grid = {});

}  // namespace rlg
