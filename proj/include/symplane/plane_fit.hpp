#pragma once

#include "symplane/geometry.hpp"

#include <cstdint>
#include <vector>

namespace symplane {

/// Corresponding points (first[k], second[k]) related by an unknown
/// reflection: first[k] ~ R(second[k]).
struct PointPairSet {
  PointCloud first;
  PointCloud second;

  std::size_t size() const { return first.size(); }
  bool empty() const { return first.empty(); }
  void add(const Vec3& a, const Vec3& b) {
    first.push_back(a);
    second.push_back(b);
  }
  PointPairSet subset(std::span<const std::size_t> indices) const;
};

/// Point samples with target signed distances. An empty weight vector means
/// unit weights.
struct SdfSampleSet {
  PointCloud points;
  std::vector<double> values;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
  void add(const Vec3& p, double s, double w = 1.0);
};

struct FitReport {
  Plane plane;
  double rms_residual = 0.0;
  /// Sum of squared residuals over the inliers, in the fit's own objective.
  double objective = 0.0;
  std::size_t inlier_count = 0;
  int iterations = 0;
  /// Inlier indices into the input; every index when RANSAC is off.
  std::vector<std::size_t> inliers;
};

struct RansacOptions {
  bool enabled = false;
  int iterations = 256;
  /// Per-pair residual threshold as a fraction of the pair-set diameter.
  double inlier_threshold = 0.01;
  /// A consensus smaller than this fraction of the input is rejected.
  double min_inlier_fraction = 0.2;
  std::uint64_t seed = 0;
};

struct ReflectionFitOptions {
  RansacOptions ransac;
  int max_iterations = 50;
  double step_tolerance = 1e-12;
  /// Pairs closer than this fraction of the scene diameter carry no normal
  /// information.
  double degeneracy_fraction = 1e-6;
};

/// sum_k || first_k - R(second_k) ||^2
double reflection_objective(const Plane& plane, const PointPairSet& pairs);

/// Per-pair squared residuals || first_k - R(second_k) ||^2.
std::vector<double> reflection_residuals(const Plane& plane,
                                         const PointPairSet& pairs);

/// Least-squares reflection plane through corresponding pairs, optionally
/// wrapped in RANSAC. Returns a canonical plane.
FitReport fit_reflection_plane(const PointPairSet& pairs,
                               const ReflectionFitOptions& options = {});

/// Damped Gauss-Newton on the exact reflection objective from `start`.
/// `history` receives the objective before the first and after each
/// accepted step.
Plane refine_reflection_plane(const PointPairSet& pairs, const Plane& start,
                              const ReflectionFitOptions& options,
                              int* iterations = nullptr,
                              std::vector<double>* history = nullptr);

/// sum_k w_k ((n . p_k + d) - s_k)^2
double sdf_objective(const Plane& plane, const SdfSampleSet& samples);

/// Unit-normal constrained least squares of a plane to signed distance
/// samples. The offset is eliminated in closed form and the normal is found
/// from the eigen-decomposition of the weighted scatter matrix and a root of
/// the secular equation. The returned plane is canonical, which may be the
/// negation of the oriented minimiser; `objective` belongs to the latter.
FitReport fit_plane_from_sdf(const SdfSampleSet& samples);

}  // namespace symplane
