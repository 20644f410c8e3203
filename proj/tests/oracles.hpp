#pragma once

// Test-side reference computations, written independently of the library's
// algorithms.

#include "symplane/geometry.hpp"
#include "symplane/plane_fit.hpp"
#include "symplane/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

using symplane::CounterRng;
using symplane::Plane;
using symplane::Vec3;

inline Vec3 random_unit(CounterRng& rng) {
  for (;;) {
    const double x = rng.normal(), y = rng.normal(), z = rng.normal();
    const Vec3 v(x, y, z);
    if (v.norm() > 1e-3) return v.normalized();
  }
}

inline Vec3 random_point(CounterRng& rng, double scale) {
  const double x = rng.uniform(-scale, scale), y = rng.uniform(-scale, scale),
               z = rng.uniform(-scale, scale);
  return {x, y, z};
}

// Multiples of 1/1024 in [-scale, scale]: exact in float32 storage.
inline Vec3 random_dyadic_point(CounterRng& rng, int scale) {
  auto one = [&] { return (double(rng.below(2048 * std::uint64_t(scale) + 1)) - 1024.0 * scale) / 1024.0; };
  const double x = one(), y = one(), z = one();
  return {x, y, z};
}

inline Plane random_plane(CounterRng& rng, double offset_scale) {
  const Vec3 n = random_unit(rng);
  return {n, rng.uniform(-offset_scale, offset_scale)};
}

// Reflection written out from the definition.
inline Vec3 mirror(const Vec3& n, double d, const Vec3& p) {
  const double s = n.x() * p.x() + n.y() * p.y() + n.z() * p.z() + d;
  return {p.x() - 2 * s * n.x(), p.y() - 2 * s * n.y(), p.z() - 2 * s * n.z()};
}

inline double pair_objective(const Vec3& n, double d, const symplane::PointPairSet& pairs) {
  double total = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    total += (pairs.first[k] - mirror(n, d, pairs.second[k])).squaredNorm();
  }
  return total;
}

inline double sdf_objective(const Vec3& n, double d, const symplane::SdfSampleSet& s) {
  double total = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double w = s.weights.empty() ? 1.0 : s.weights[k];
    const double r = n.dot(s.points[k]) + d - s.values[k];
    total += w * r * r;
  }
  return total;
}

inline std::vector<Vec3> fibonacci_sphere(std::size_t count) {
  std::vector<Vec3> out;
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (double(i) + 0.5) / double(count);
    const double r = std::sqrt(1.0 - z * z);
    out.emplace_back(r * std::cos(golden * double(i)), r * std::sin(golden * double(i)), z);
  }
  return out;
}

// Pattern search over (direction, offset) on the unit sphere; the direction
// is perturbed along two tangent axes and renormalised.
inline double compass_polish(const std::function<double(const Vec3&, double)>& f, Vec3 n,
                             double d, double step, double min_step) {
  double best = f(n, d);
  while (step > min_step) {
    bool moved = false;
    const Vec3 t1 = n.unitOrthogonal();
    const Vec3 t2 = n.cross(t1);
    for (int axis = 0; axis < 3; ++axis) {
      for (double sign : {1.0, -1.0}) {
        Vec3 cn = n;
        double cd = d;
        if (axis == 0) cn = (n + sign * step * t1).normalized();
        if (axis == 1) cn = (n + sign * step * t2).normalized();
        if (axis == 2) cd = d + sign * step;
        const double v = f(cn, cd);
        if (v < best) {
          best = v;
          n = cn;
          d = cd;
          moved = true;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

// Dense direction grid, exact 1-D minimisation of the offset per direction
// (the objective is quadratic in d), then a pattern-search polish of the
// best few grid points.
inline double sphere_grid_minimum(const std::function<double(const Vec3&, double)>& f,
                                  const std::function<double(const Vec3&)>& best_offset,
                                  double offset_scale, std::size_t directions = 20000,
                                  std::size_t polished = 8) {
  const std::vector<Vec3> grid = fibonacci_sphere(directions);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    scored.emplace_back(f(grid[i], best_offset(grid[i])), i);
  }
  std::partial_sort(scored.begin(), scored.begin() + long(polished), scored.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < polished; ++j) {
    const Vec3& n = grid[scored[j].second];
    best = std::min(best, compass_polish(f, n, best_offset(n), 0.02 * std::max(1.0, offset_scale), 1e-13));
  }
  return best;
}

inline double brute_force_pairs(const symplane::PointPairSet& pairs, double scale) {
  Vec3 mid = Vec3::Zero();
  for (std::size_t k = 0; k < pairs.size(); ++k) mid += 0.5 * (pairs.first[k] + pairs.second[k]);
  mid /= double(pairs.size());
  return sphere_grid_minimum(
      [&](const Vec3& n, double d) { return pair_objective(n, d, pairs); },
      [&](const Vec3& n) { return -n.dot(mid); }, scale);
}

inline double brute_force_sdf(const symplane::SdfSampleSet& s, double scale) {
  return sphere_grid_minimum(
      [&](const Vec3& n, double d) { return sdf_objective(n, d, s); },
      [&](const Vec3& n) {
        double sw = 0, acc = 0;
        for (std::size_t k = 0; k < s.size(); ++k) {
          const double w = s.weights.empty() ? 1.0 : s.weights[k];
          sw += w;
          acc += w * (s.values[k] - n.dot(s.points[k]));
        }
        return acc / sw;
      },
      scale);
}

// Minimum total over all injective row -> column maps (rows <= cols) or the
// transpose.
inline double brute_force_assignment(const Eigen::MatrixXd& c) {
  if (c.rows() == 0 || c.cols() == 0) return 0.0;
  if (c.rows() > c.cols()) return brute_force_assignment(c.transpose());
  std::vector<int> cols(std::size_t(c.cols()));
  std::iota(cols.begin(), cols.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (int r = 0; r < c.rows(); ++r) total += c(r, cols[std::size_t(r)]);
    best = std::min(best, total);
  } while (std::next_permutation(cols.begin(), cols.end()));
  return best;
}

// Symmetric Hausdorff distance by exhaustive search.
inline double hausdorff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto directed = [](const std::vector<Vec3>& x, const std::vector<Vec3>& y) {
    double worst = 0;
    for (const Vec3& p : x) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const Vec3& q : y) nearest = std::min(nearest, (p - q).squaredNorm());
      worst = std::max(worst, nearest);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace oracle
