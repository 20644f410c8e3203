#pragma once

#include "symplane/assignment.hpp"
#include "symplane/geometry.hpp"

#include <map>
#include <vector>

namespace symplane {

/// Canonical planes with no two members within plane distance 1e-9.
class PlaneSet {
 public:
  PlaneSet() = default;
  /// Canonicalizes each plane; throws invalid-input on duplicates.
  explicit PlaneSet(std::vector<Plane> planes);

  const std::vector<Plane>& planes() const { return planes_; }
  std::size_t size() const { return planes_.size(); }
  bool empty() const { return planes_.empty(); }
  const Plane& operator[](std::size_t i) const { return planes_[i]; }
  bool contains(const Plane& plane, double tol = 1e-9) const;

 private:
  std::vector<Plane> planes_;
};

/// Conventions for sets the metrics are not defined on.
struct EmptySetPolicy {
  /// Completeness when no prediction exists but visible ground truth does.
  double completeness_without_predictions = 90.0;
  /// F-score when tp = fp = fn = 0.
  double fscore_when_empty = 1.0;
};

struct EvalReport {
  double geodesic = 0.0;
  double exactness = 0.0;
  double completeness = 0.0;
  std::map<double, double> fscore_at;
  double dense_error = 0.0;
};

/// Angle between the lines spanned by two unit normals, degrees.
double normal_angle(const Vec3& a, const Vec3& b);

double exactness(const PlaneSet& pred, const PlaneSet& gt_all);
double completeness(const PlaneSet& pred, const PlaneSet& gt_visible,
                    const EmptySetPolicy& policy = {});

/// Matrix of normal_angle between predictions (rows) and ground truth.
CostMatrix angle_costs(const PlaneSet& pred, const PlaneSet& gt);

/// Visibility-aware F-score. Predictions matched within `threshold` degrees
/// to a ground-truth plane that is not visible are neither true nor false
/// positives.
double fscore(const PlaneSet& pred, const PlaneSet& gt_all,
              const PlaneSet& gt_visible, double threshold,
              const EmptySetPolicy& policy = {});

struct FscoreCounts {
  std::size_t tp = 0, fp = 0, fn = 0, nv = 0;
};
FscoreCounts fscore_counts(const PlaneSet& pred, const PlaneSet& gt_all,
                           const PlaneSet& gt_visible, double threshold);

/// Largest absolute distance from the cloud to the plane.
double max_plane_distance(const Plane& plane, std::span<const Vec3> cloud);

/// Mean reflection discrepancy over the cloud, normalised by the largest
/// distance of any cloud point to `gt`.
double dense_error(const Plane& pred, const Plane& gt,
                   std::span<const Vec3> cloud);

/// Average of the exactness-style and completeness-style dense errors.
double dense_error_set(const PlaneSet& pred, const PlaneSet& gt_all,
                       const PlaneSet& gt_visible, std::span<const Vec3> cloud);

struct VisibilityOptions {
  double central_fraction = 0.8;
  std::size_t min_valid_pixels = 1000;
  double min_side_fraction = 0.05;
};

/// Pixel window [u0, u1) x [v0, v1) of the central crop.
struct CropWindow {
  std::size_t u0 = 0, u1 = 0, v0 = 0, v1 = 0;
};
CropWindow central_crop(std::size_t width, std::size_t height, double fraction);

/// True when at least the minimum fraction of the valid central pixels lies
/// strictly on each side of the plane.
bool visibility_filter(const DepthMap& depth, const CameraModel& camera,
                       const Plane& plane, const VisibilityOptions& options = {});

/// sum_k c_k |pred_k - gt_k| - alpha sum_k log c_k over jointly valid
/// pixels; the confidence is taken from `pred`.
double matching_cost(const SignedDistanceMap& pred, const SignedDistanceMap& gt,
                     double alpha);

/// Cost matrix of matching_cost between predictions (rows) and ground truth.
CostMatrix matching_costs(const std::vector<SignedDistanceMap>& preds,
                          const std::vector<SignedDistanceMap>& gts,
                          double alpha);

double median(std::vector<double> values);

}  // namespace symplane
