#include "rlg/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "rlg/error.hpp"

namespace rlg {

std::vector<double> uniform_edges(double lo, double hi, std::size_t bins) {
  if (bins < 1 || !(hi > lo)) throw Error(ErrorCode::InvalidArgument, "uniform_edges: need bins >= 1 and hi > lo");
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  return e;
}

Histogram make_histogram(std::span<const double> samples, const std::vector<double>& edges) {
  if (edges.size() < 2) throw Error(ErrorCode::InvalidArgument, "histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i] > edges[i - 1])) throw Error(ErrorCode::InvalidArgument, "histogram edges must be increasing");
  Histogram h;
  h.edges = edges;
  h.counts.assign(edges.size() - 1, 0);
  h.total = samples.size();
  for (double x : samples) {
    if (!(x >= edges.front() && x <= edges.back())) {
      ++h.overflow;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : std::min(bin - 1, h.counts.size() - 1);
    ++h.counts[bin];
  }
  return h;
}

double ReferenceDensity::cdf(double x) const {
  return std::visit(
      [x](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PointMass>) {
          return x >= d.at ? 1.0 : 0.0;
        } else {
          return d.cdf(x);
        }
      },
      impl_);
}

double histogram_kl(const Histogram& hist, const ReferenceDensity& density) {
  if (hist.total == 0) throw Error(ErrorCode::EmptyInput, "histogram_kl: no samples");
  const double n = static_cast<double>(hist.total);
  double kl = 0.0;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    if (hist.counts[i] == 0) continue;
    const double p = static_cast<double>(hist.counts[i]) / n;
    const double q = std::max(density.mass(hist.edges[i], hist.edges[i + 1]), 1e-12);
    kl += p * std::log(p / q);
  }
  return kl;
}

double histogram_kl(const SampleBatch& samples, const ReferenceDensity& density, const KlOptions& opts) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "histogram_kl: empty sample set");
  if (samples.dim != 1) throw Error(ErrorCode::Unsupported, "histogram_kl is 1-D only");
  if (samples.size() < opts.min_samples)
    throw Error(ErrorCode::InvalidArgument, "histogram_kl: need at least " + std::to_string(opts.min_samples) +
                                                " samples, got " + std::to_string(samples.size()));
  return histogram_kl(make_histogram(samples.values, uniform_edges(opts.lo, opts.hi, opts.bins)), density);
}

double wasserstein1(const SampleBatch& samples, const ReferenceDensity& density, const Grid1D& grid) {
  if (samples.dim != 1) throw Error(ErrorCode::Unsupported, "wasserstein1 is 1-D only");
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "wasserstein1: empty sample set");
  if (grid.points < 2 || !(grid.hi > grid.lo)) throw Error(ErrorCode::InvalidArgument, "wasserstein1: bad grid");
  std::vector<double> sorted = samples.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::size_t below = 0;
  double acc = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < grid.points; ++i) {
    const double x = grid.at(i);
    while (below < sorted.size() && sorted[below] <= x) ++below;
    const double diff = std::abs(static_cast<double>(below) / n - density.cdf(x));
    if (i > 0) acc += 0.5 * (diff + prev) * grid.step();
    prev = diff;
  }
  return acc;
}

}  // namespace rlg
