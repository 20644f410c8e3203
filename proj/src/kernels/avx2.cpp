// AVX2 variants of the kernel table. Functions carry a target attribute
// instead of compiling the whole file with -mavx2, so nothing inline from
// shared headers is emitted with AVX2 encodings.

#include <immintrin.h>

#include "scalar_ops.hpp"
#include "symplane/kernels.hpp"

#include <algorithm>

#define SYMPLANE_AVX2 __attribute__((target("avx2")))

namespace symplane::kernels {
namespace {

struct Lanes3 {
  __m256d x, y, z;
};

// Deinterleaves four consecutive x,y,z points.
SYMPLANE_AVX2 inline Lanes3 load_points(const double* p) {
  const __m256d v0 = _mm256_loadu_pd(p);      // x0 y0 z0 x1
  const __m256d v1 = _mm256_loadu_pd(p + 4);  // y1 z1 x2 y2
  const __m256d v2 = _mm256_loadu_pd(p + 8);  // z2 x3 y3 z3
  const __m256d m1 = _mm256_permute2f128_pd(v0, v1, 0x30);  // x0 y0 x2 y2
  const __m256d m2 = _mm256_permute2f128_pd(v0, v2, 0x21);  // z0 x1 z2 x3
  const __m256d m3 = _mm256_permute2f128_pd(v1, v2, 0x30);  // y1 z1 y3 z3
  return {_mm256_shuffle_pd(m1, m2, 0xA), _mm256_shuffle_pd(m1, m3, 0x5),
          _mm256_shuffle_pd(m2, m3, 0xA)};
}

struct PlaneLanes {
  __m256d nx, ny, nz, d;
};

SYMPLANE_AVX2 inline PlaneLanes broadcast_plane(const double* plane) {
  return {_mm256_set1_pd(plane[0]), _mm256_set1_pd(plane[1]),
          _mm256_set1_pd(plane[2]), _mm256_set1_pd(plane[3])};
}

SYMPLANE_AVX2 inline __m256d signed_distance4(const Lanes3& p,
                                              const PlaneLanes& pl) {
  __m256d s = _mm256_mul_pd(pl.nx, p.x);
  s = _mm256_add_pd(s, _mm256_mul_pd(pl.ny, p.y));
  s = _mm256_add_pd(s, _mm256_mul_pd(pl.nz, p.z));
  return _mm256_add_pd(s, pl.d);
}

SYMPLANE_AVX2 inline double horizontal_sum(__m256d v) {
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

SYMPLANE_AVX2 void signed_distances(const double* xyz, std::size_t count,
                                    const double* plane, double* out) {
  const PlaneLanes pl = broadcast_plane(plane);
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    _mm256_storeu_pd(out + k, signed_distance4(load_points(xyz + 3 * k), pl));
  }
  for (; k < count; ++k) out[k] = detail::signed_distance(xyz + 3 * k, plane);
}

SYMPLANE_AVX2 SideCounts count_sides(const double* xyz, std::size_t count,
                                     const double* plane) {
  const PlaneLanes pl = broadcast_plane(plane);
  const __m256d zero = _mm256_setzero_pd();
  SideCounts counts;
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const __m256d s = signed_distance4(load_points(xyz + 3 * k), pl);
    counts.positive += __builtin_popcount(
        _mm256_movemask_pd(_mm256_cmp_pd(s, zero, _CMP_GT_OQ)));
    counts.negative += __builtin_popcount(
        _mm256_movemask_pd(_mm256_cmp_pd(s, zero, _CMP_LT_OQ)));
  }
  for (; k < count; ++k) {
    const double s = detail::signed_distance(xyz + 3 * k, plane);
    counts.positive += s > 0.0;
    counts.negative += s < 0.0;
  }
  return counts;
}

SYMPLANE_AVX2 double max_abs_signed_distance(const double* xyz,
                                             std::size_t count,
                                             const double* plane) {
  const PlaneLanes pl = broadcast_plane(plane);
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const __m256d s = signed_distance4(load_points(xyz + 3 * k), pl);
    // max_pd returns its second operand when the first is NaN, matching
    // std::max(best, nan) == best in the scalar loop.
    acc = _mm256_max_pd(_mm256_andnot_pd(sign, s), acc);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double best = std::max(std::max(lanes[0], lanes[1]),
                         std::max(lanes[2], lanes[3]));
  for (; k < count; ++k) {
    best = std::max(best, std::abs(detail::signed_distance(xyz + 3 * k, plane)));
  }
  return best;
}

SYMPLANE_AVX2 inline __m256d reflection_gap4(const Lanes3& p,
                                             const PlaneLanes& a,
                                             const PlaneLanes& b) {
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d sa = signed_distance4(p, a);
  const __m256d sb = signed_distance4(p, b);
  const __m256d gx = _mm256_mul_pd(
      two, _mm256_sub_pd(_mm256_mul_pd(sb, b.nx), _mm256_mul_pd(sa, a.nx)));
  const __m256d gy = _mm256_mul_pd(
      two, _mm256_sub_pd(_mm256_mul_pd(sb, b.ny), _mm256_mul_pd(sa, a.ny)));
  const __m256d gz = _mm256_mul_pd(
      two, _mm256_sub_pd(_mm256_mul_pd(sb, b.nz), _mm256_mul_pd(sa, a.nz)));
  __m256d n2 = _mm256_mul_pd(gx, gx);
  n2 = _mm256_add_pd(n2, _mm256_mul_pd(gy, gy));
  n2 = _mm256_add_pd(n2, _mm256_mul_pd(gz, gz));
  return _mm256_sqrt_pd(n2);
}

SYMPLANE_AVX2 double reflection_gap_sum(const double* xyz, std::size_t count,
                                        const double* plane_a,
                                        const double* plane_b) {
  const PlaneLanes a = broadcast_plane(plane_a);
  const PlaneLanes b = broadcast_plane(plane_b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    acc = _mm256_add_pd(acc, reflection_gap4(load_points(xyz + 3 * k), a, b));
  }
  double sum = horizontal_sum(acc);
  for (; k < count; ++k) {
    sum += detail::reflection_gap(xyz + 3 * k, plane_a, plane_b);
  }
  return sum;
}

SYMPLANE_AVX2 inline __m256d reflection_residual4(const Lanes3& a,
                                                  const Lanes3& b,
                                                  const PlaneLanes& pl) {
  const __m256d t = _mm256_mul_pd(_mm256_set1_pd(2.0), signed_distance4(b, pl));
  const __m256d rx =
      _mm256_add_pd(_mm256_sub_pd(a.x, b.x), _mm256_mul_pd(t, pl.nx));
  const __m256d ry =
      _mm256_add_pd(_mm256_sub_pd(a.y, b.y), _mm256_mul_pd(t, pl.ny));
  const __m256d rz =
      _mm256_add_pd(_mm256_sub_pd(a.z, b.z), _mm256_mul_pd(t, pl.nz));
  __m256d r2 = _mm256_mul_pd(rx, rx);
  r2 = _mm256_add_pd(r2, _mm256_mul_pd(ry, ry));
  return _mm256_add_pd(r2, _mm256_mul_pd(rz, rz));
}

SYMPLANE_AVX2 void reflection_residuals(const double* a_xyz,
                                        const double* b_xyz,
                                        std::size_t count,
                                        const double* plane, double* out) {
  const PlaneLanes pl = broadcast_plane(plane);
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    _mm256_storeu_pd(out + k,
                     reflection_residual4(load_points(a_xyz + 3 * k),
                                          load_points(b_xyz + 3 * k), pl));
  }
  for (; k < count; ++k) {
    out[k] = detail::reflection_residual(a_xyz + 3 * k, b_xyz + 3 * k, plane);
  }
}

SYMPLANE_AVX2 double reflection_objective(const double* a_xyz,
                                          const double* b_xyz,
                                          std::size_t count,
                                          const double* plane) {
  const PlaneLanes pl = broadcast_plane(plane);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    acc = _mm256_add_pd(acc, reflection_residual4(load_points(a_xyz + 3 * k),
                                                  load_points(b_xyz + 3 * k),
                                                  pl));
  }
  double sum = horizontal_sum(acc);
  for (; k < count; ++k) {
    sum += detail::reflection_residual(a_xyz + 3 * k, b_xyz + 3 * k, plane);
  }
  return sum;
}

SYMPLANE_AVX2 double weighted_l1(const double* x, const double* y,
                                 const double* w, std::size_t count) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const __m256d diff =
        _mm256_sub_pd(_mm256_loadu_pd(x + k), _mm256_loadu_pd(y + k));
    acc = _mm256_add_pd(
        acc, _mm256_mul_pd(_mm256_loadu_pd(w + k), _mm256_andnot_pd(sign, diff)));
  }
  double sum = horizontal_sum(acc);
  for (; k < count; ++k) sum += w[k] * std::abs(x[k] - y[k]);
  return sum;
}

SYMPLANE_AVX2 FirstMoments first_moments(const double* xyz, const double* s,
                                         const double* w, std::size_t count) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d aw = _mm256_setzero_pd(), ax = aw, ay = aw, az = aw, as = aw;
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const Lanes3 p = load_points(xyz + 3 * k);
    const __m256d wk = w ? _mm256_loadu_pd(w + k) : one;
    aw = _mm256_add_pd(aw, wk);
    ax = _mm256_add_pd(ax, _mm256_mul_pd(wk, p.x));
    ay = _mm256_add_pd(ay, _mm256_mul_pd(wk, p.y));
    az = _mm256_add_pd(az, _mm256_mul_pd(wk, p.z));
    as = _mm256_add_pd(as, _mm256_mul_pd(wk, _mm256_loadu_pd(s + k)));
  }
  FirstMoments m{horizontal_sum(aw), horizontal_sum(ax), horizontal_sum(ay),
                 horizontal_sum(az), horizontal_sum(as)};
  for (; k < count; ++k) {
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

SYMPLANE_AVX2 SecondMoments second_moments(const double* xyz, const double* s,
                                           const double* w, std::size_t count,
                                           const double* center) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d cx = _mm256_set1_pd(center[0]);
  const __m256d cy = _mm256_set1_pd(center[1]);
  const __m256d cz = _mm256_set1_pd(center[2]);
  const __m256d cs = _mm256_set1_pd(center[3]);
  __m256d xx = _mm256_setzero_pd(), xy = xx, xz = xx, yy = xx, yz = xx,
          zz = xx, sx = xx, sy = xx, sz = xx, ss = xx;
  std::size_t k = 0;
  for (; k + 4 <= count; k += 4) {
    const Lanes3 p = load_points(xyz + 3 * k);
    const __m256d wk = w ? _mm256_loadu_pd(w + k) : one;
    const __m256d dx = _mm256_sub_pd(p.x, cx);
    const __m256d dy = _mm256_sub_pd(p.y, cy);
    const __m256d dz = _mm256_sub_pd(p.z, cz);
    const __m256d ds = _mm256_sub_pd(_mm256_loadu_pd(s + k), cs);
    const __m256d wx = _mm256_mul_pd(wk, dx);
    const __m256d wy = _mm256_mul_pd(wk, dy);
    const __m256d wz = _mm256_mul_pd(wk, dz);
    xx = _mm256_add_pd(xx, _mm256_mul_pd(wx, dx));
    xy = _mm256_add_pd(xy, _mm256_mul_pd(wx, dy));
    xz = _mm256_add_pd(xz, _mm256_mul_pd(wx, dz));
    yy = _mm256_add_pd(yy, _mm256_mul_pd(wy, dy));
    yz = _mm256_add_pd(yz, _mm256_mul_pd(wy, dz));
    zz = _mm256_add_pd(zz, _mm256_mul_pd(wz, dz));
    sx = _mm256_add_pd(sx, _mm256_mul_pd(wx, ds));
    sy = _mm256_add_pd(sy, _mm256_mul_pd(wy, ds));
    sz = _mm256_add_pd(sz, _mm256_mul_pd(wz, ds));
    ss = _mm256_add_pd(ss, _mm256_mul_pd(_mm256_mul_pd(wk, ds), ds));
  }
  SecondMoments m{horizontal_sum(xx), horizontal_sum(xy), horizontal_sum(xz),
                  horizontal_sum(yy), horizontal_sum(yz), horizontal_sum(zz),
                  horizontal_sum(sx), horizontal_sum(sy), horizontal_sum(sz),
                  horizontal_sum(ss)};
  for (; k < count; ++k) {
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

const KernelTable& avx2_table() {
  static const KernelTable table{
      "avx2",
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
