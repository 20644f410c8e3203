#include "scalar_ops.hpp"
#include "symplane/kernels.hpp"

#include <algorithm>

namespace symplane::kernels {
namespace {

void signed_distances(const double* xyz, std::size_t count,
                      const double* plane, double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = detail::signed_distance(xyz + 3 * k, plane);
  }
}

SideCounts count_sides(const double* xyz, std::size_t count,
                       const double* plane) {
  SideCounts counts;
  for (std::size_t k = 0; k < count; ++k) {
    const double s = detail::signed_distance(xyz + 3 * k, plane);
    counts.positive += s > 0.0;
    counts.negative += s < 0.0;
  }
  return counts;
}

double max_abs_signed_distance(const double* xyz, std::size_t count,
                               const double* plane) {
  double best = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    best = std::max(best, std::abs(detail::signed_distance(xyz + 3 * k, plane)));
  }
  return best;
}

double reflection_gap_sum(const double* xyz, std::size_t count,
                          const double* plane_a, const double* plane_b) {
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    sum += detail::reflection_gap(xyz + 3 * k, plane_a, plane_b);
  }
  return sum;
}

void reflection_residuals(const double* a_xyz, const double* b_xyz,
                          std::size_t count, const double* plane,
                          double* out) {
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = detail::reflection_residual(a_xyz + 3 * k, b_xyz + 3 * k, plane);
  }
}

double reflection_objective(const double* a_xyz, const double* b_xyz,
                            std::size_t count, const double* plane) {
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    sum += detail::reflection_residual(a_xyz + 3 * k, b_xyz + 3 * k, plane);
  }
  return sum;
}

double weighted_l1(const double* x, const double* y, const double* w,
                   std::size_t count) {
  double sum = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    sum += w[k] * std::abs(x[k] - y[k]);
  }
  return sum;
}

FirstMoments first_moments(const double* xyz, const double* s,
                           const double* w, std::size_t count) {
  FirstMoments m;
  for (std::size_t k = 0; k < count; ++k) {
    const double wk = w ? w[k] : 1.0;
    const double* p = xyz + 3 * k;
    m.w += wk;
    m.wx += wk * p[0];
    m.wy += wk * p[1];
    m.wz += wk * p[2];
    m.ws += wk * s[k];
  }
  return m;
}

SecondMoments second_moments(const double* xyz, const double* s,
                             const double* w, std::size_t count,
                             const double* center) {
  SecondMoments m;
  for (std::size_t k = 0; k < count; ++k) {
    const double wk = w ? w[k] : 1.0;
    const double* p = xyz + 3 * k;
    const double dx = p[0] - center[0];
    const double dy = p[1] - center[1];
    const double dz = p[2] - center[2];
    const double ds = s[k] - center[3];
    const double wx = wk * dx;
    const double wy = wk * dy;
    const double wz = wk * dz;
    m.xx += wx * dx;
    m.xy += wx * dy;
    m.xz += wx * dz;
    m.yy += wy * dy;
    m.yz += wy * dz;
    m.zz += wz * dz;
    m.sx += wx * ds;
    m.sy += wy * ds;
    m.sz += wz * ds;
    m.ss += wk * ds * ds;
  }
  return m;
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{
      "scalar",
      &signed_distances,
      &count_sides,
      &max_abs_signed_distance,
      &reflection_gap_sum,
      &reflection_residuals,
      &reflection_objective,
      &weighted_l1,
      &first_moments,
      &second_moments,
  };
  return table;
}

}  // namespace symplane::kernels
