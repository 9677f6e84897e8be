// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace trajgeo {

/// A sequence of points in R^dim held in 64-bit precision, point-major.
///
/// All geometry in the library runs on Polyline; bundles store 32-bit
/// coordinates and widen on access.
class Polyline {
 public:
  Polyline() = default;
  Polyline(std::size_t dim, std::vector<double> coords)
      : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0 || coords_.size() % dim_ != 0) {
      throw std::invalid_argument("Polyline: coordinate count is not a multiple of dim");
    }
  }
  Polyline(std::size_t dim, std::size_t points) : dim_(dim), coords_(dim * points, 0.0) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return dim_ == 0 ? 0 : coords_.size() / dim_; }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> point(std::size_t i) { return {coords_.data() + i * dim_, dim_}; }

  const std::vector<double>& coords() const { return coords_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(squared_norm(a)); }

inline double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Cosine of the angle between a and b, clamped to [-1, 1].
///
/// Evaluated as <a,b> / sqrt(|a|^2 |b|^2) so that cosine(a, a) is exactly 1
/// and cosine(a, -a) exactly -1. Caller guarantees both norms are nonzero.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  const double c = dot(a, b) / std::sqrt(squared_norm(a) * squared_norm(b));
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

}  // namespace trajgeo
