#pragma once

// Per-element reference arithmetic. Included by every kernel translation unit
// so vector tails evaluate exactly the same expressions as the scalar table.

#include <cmath>
#include <cstddef>

namespace symplane::kernels::detail {

inline double signed_distance(const double* p, const double* plane) {
  return plane[0] * p[0] + plane[1] * p[1] + plane[2] * p[2] + plane[3];
}

inline double reflection_residual(const double* a, const double* b,
                                  const double* plane) {
  const double t = 2.0 * signed_distance(b, plane);
  const double rx = (a[0] - b[0]) + t * plane[0];
  const double ry = (a[1] - b[1]) + t * plane[1];
  const double rz = (a[2] - b[2]) + t * plane[2];
  return rx * rx + ry * ry + rz * rz;
}

inline double reflection_gap(const double* p, const double* plane_a,
                             const double* plane_b) {
  const double sa = signed_distance(p, plane_a);
  const double sb = signed_distance(p, plane_b);
  const double gx = 2.0 * (sb * plane_b[0] - sa * plane_a[0]);
  const double gy = 2.0 * (sb * plane_b[1] - sa * plane_a[1]);
  const double gz = 2.0 * (sb * plane_b[2] - sa * plane_a[2]);
  return std::sqrt(gx * gx + gy * gy + gz * gz);
}

}  // namespace symplane::kernels::detail
