#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace symplane::kernels {

// Flat data-parallel loops shared by the fitting and evaluation code. Points
// are interleaved x,y,z doubles; planes are {nx, ny, nz, d}.
//
// Each instruction set provides the same table. Element-wise kernels and
// counts must agree bit for bit with the scalar reference; reductions agree
// up to summation order.

struct SideCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;
};

/// Weighted first moments {sum w, sum w x, sum w y, sum w z, sum w s}.
struct FirstMoments {
  double w = 0, wx = 0, wy = 0, wz = 0, ws = 0;
};

/// Weighted second moments about a centre (p0, s0):
/// sum w (p - p0)(p - p0)^T (upper triangle) and sum w (s - s0)(p - p0).
struct SecondMoments {
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;
  double sx = 0, sy = 0, sz = 0;
  double ss = 0;
};

struct KernelTable {
  std::string_view name;

  // out[k] = n . p_k + d
  void (*signed_distances)(const double* xyz, std::size_t count,
                           const double* plane, double* out);

  // Number of points with strictly positive / strictly negative distance.
  SideCounts (*count_sides)(const double* xyz, std::size_t count,
                            const double* plane);

  // max_k |n . p_k + d|, 0 for empty input.
  double (*max_abs_signed_distance)(const double* xyz, std::size_t count,
                                    const double* plane);

  // sum_k || R_a(p_k) - R_b(p_k) ||
  double (*reflection_gap_sum)(const double* xyz, std::size_t count,
                               const double* plane_a, const double* plane_b);

  // out[k] = || a_k - R(b_k) ||^2
  void (*reflection_residuals)(const double* a_xyz, const double* b_xyz,
                               std::size_t count, const double* plane,
                               double* out);

  // sum_k || a_k - R(b_k) ||^2
  double (*reflection_objective)(const double* a_xyz, const double* b_xyz,
                                 std::size_t count, const double* plane);

  // sum_k w_k |x_k - y_k|
  double (*weighted_l1)(const double* x, const double* y, const double* w,
                        std::size_t count);

  // weights may be null (all ones).
  FirstMoments (*first_moments)(const double* xyz, const double* s,
                                const double* w, std::size_t count);
  SecondMoments (*second_moments)(const double* xyz, const double* s,
                                  const double* w, std::size_t count,
                                  const double* center);
};

enum class Isa : std::uint8_t { kScalar, kAvx2 };

const KernelTable& scalar_table();

/// Null when the instruction set is not compiled in or not supported by the
/// running CPU.
const KernelTable* table_for(Isa isa);

/// Best table for the running CPU, chosen once.
const KernelTable& active();

bool cpu_supports(Isa isa);

}  // namespace symplane::kernels
