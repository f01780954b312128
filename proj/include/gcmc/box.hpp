#pragma once

#include <cmath>
#include <stdexcept>

#include "gcmc/vec3.hpp"

namespace gcmc {

/// Periodic cubic simulation domain with side length L (sigma units).
struct SimBox {
  double side_length = 0.0;

  explicit SimBox(double l) : side_length(l) {
    if (!(l > 0.0) || !std::isfinite(l))
      throw std::invalid_argument("box side length must be positive and finite");
  }

  double volume() const { return side_length * side_length * side_length; }
};

namespace detail {

inline double wrap_axis(double v, double l) {
  // fmod is exact, so the only fixups needed are the sign and the case where
  // adding L rounds back up to L itself.
  double r = std::fmod(v, l);
  if (r < 0.0) r += l;
  if (r >= l) r = 0.0;
  return r;
}

}  // namespace detail

/// Wraps a position into [0, L) per axis; the result differs from the input
/// by a whole number of box lengths.
inline Vec3 wrap_position(const Vec3& p, const SimBox& box) {
  if (!p.finite()) throw std::invalid_argument("wrap_position: non-finite coordinate");
  const double l = box.side_length;
  return {detail::wrap_axis(p.x, l), detail::wrap_axis(p.y, l), detail::wrap_axis(p.z, l)};
}

/// Squared distance between the nearest periodic images of a and b.
/// Each per-axis delta ends up with magnitude <= L/2.
inline double min_image_dist2(const Vec3& a, const Vec3& b, const SimBox& box) {
  const double l = box.side_length;
  const double inv_l = 1.0 / l;
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  double dz = a.z - b.z;
  dx -= l * std::nearbyint(dx * inv_l);
  dy -= l * std::nearbyint(dy * inv_l);
  dz -= l * std::nearbyint(dz * inv_l);
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace gcmc
