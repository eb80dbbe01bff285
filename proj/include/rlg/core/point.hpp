#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>

#include "rlg/error.hpp"

namespace rlg {

inline constexpr int kMaxDim = 2;

// A sample location or vector value in 1 or 2 dimensions.
class Point {
 public:
  Point() = default;
  explicit Point(int dim) : dim_(check_dim(dim)) {}
  Point(std::initializer_list<double> coords) : dim_(check_dim(static_cast<int>(coords.size()))) {
    std::size_t i = 0;
    for (double c : coords) c_[i++] = c;
  }
  static Point scalar(double v) { return Point{v}; }
  static Point from(std::span<const double> coords) {
    Point p(static_cast<int>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i) p.c_[i] = coords[i];
    return p;
  }

  int dim() const noexcept { return dim_; }
  double operator[](int i) const noexcept { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) noexcept { return c_[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const noexcept { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  std::span<double> coords() noexcept { return {c_.data(), static_cast<std::size_t>(dim_)}; }

  bool finite() const noexcept {
    for (int i = 0; i < dim_; ++i)
      if (!std::isfinite(c_[static_cast<std::size_t>(i)])) return false;
    return true;
  }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a[i] != b[i]) return false;
    return true;
  }

 private:
  static int check_dim(int d) {
    if (d < 1 || d > kMaxDim) throw Error(ErrorCode::DimensionMismatch, "point dimension must be 1 or 2");
    return d;
  }

  std::array<double, kMaxDim> c_{};
  int dim_ = 1;
};

inline void require_same_dim(const Point& a, const Point& b, const char* what) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, what);
}

// Componentwise a*x + b*y.
inline Point lincomb(double a, const Point& x, double b, const Point& y) {
  require_same_dim(x, y, "lincomb operands");
  Point r(x.dim());
  for (int i = 0; i < x.dim(); ++i) r[i] = a * x[i] + b * y[i];
  return r;
}

inline Point operator+(const Point& x, const Point& y) { return lincomb(1.0, x, 1.0, y); }
inline Point operator-(const Point& x, const Point& y) { return lincomb(1.0, x, -1.0, y); }
inline Point operator*(double a, const Point& x) {
  Point r(x.dim());
  for (int i = 0; i < x.dim(); ++i) r[i] = a * x[i];
  return r;
}

}  // namespace rlg
