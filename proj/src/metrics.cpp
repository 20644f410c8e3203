#include "symplane/metrics.hpp"

#include "symplane/error.hpp"
#include "symplane/kernels.hpp"
#include "symplane/plane_cluster.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace symplane {
namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

std::array<double, 4> coefficients(const Plane& plane) {
  return {plane.normal.x(), plane.normal.y(), plane.normal.z(), plane.offset};
}

void check_unit(const Vec3& n) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidInput, "normal must be a unit vector");
  }
}

double nearest_angle(const Plane& plane, const PlaneSet& others) {
  double best = std::numeric_limits<double>::infinity();
  for (const Plane& o : others.planes()) {
    best = std::min(best, normal_angle(plane.normal, o.normal));
  }
  return best;
}

}  // namespace

PlaneSet::PlaneSet(std::vector<Plane> planes) {
  planes_.reserve(planes.size());
  for (const Plane& p : planes) {
    const Plane c = canonicalize(p);
    if (contains(c)) {
      throw Error(ErrorKind::kInvalidInput, "plane set contains duplicates");
    }
    planes_.push_back(c);
  }
}

bool PlaneSet::contains(const Plane& plane, double tol) const {
  // Unit scales: the distance is radians plus scene units.
  return std::any_of(planes_.begin(), planes_.end(), [&](const Plane& p) {
    return plane_distance(p, plane, 1.0, 1.0) <= tol;
  });
}

double normal_angle(const Vec3& a, const Vec3& b) {
  check_unit(a);
  check_unit(b);
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b))) * kRadToDeg;
}

double exactness(const PlaneSet& pred, const PlaneSet& gt_all) {
  if (pred.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "exactness of an empty prediction");
  }
  if (gt_all.empty()) {
    throw Error(ErrorKind::kInvalidInput, "exactness needs ground-truth planes");
  }
  double sum = 0.0;
  for (const Plane& p : pred.planes()) sum += nearest_angle(p, gt_all);
  return sum / static_cast<double>(pred.size());
}

double completeness(const PlaneSet& pred, const PlaneSet& gt_visible,
                    const EmptySetPolicy& policy) {
  if (gt_visible.empty()) {
    throw Error(ErrorKind::kUndefinedMetric,
                "completeness without visible ground truth");
  }
  if (pred.empty()) return policy.completeness_without_predictions;
  double sum = 0.0;
  for (const Plane& g : gt_visible.planes()) sum += nearest_angle(g, pred);
  return sum / static_cast<double>(gt_visible.size());
}

CostMatrix angle_costs(const PlaneSet& pred, const PlaneSet& gt) {
  CostMatrix costs(static_cast<Eigen::Index>(pred.size()),
                   static_cast<Eigen::Index>(gt.size()));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (std::size_t j = 0; j < gt.size(); ++j) {
      costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          normal_angle(pred[i].normal, gt[j].normal);
    }
  }
  return costs;
}

FscoreCounts fscore_counts(const PlaneSet& pred, const PlaneSet& gt_all,
                           const PlaneSet& gt_visible, double threshold) {
  if (!(threshold > 0.0)) {
    throw Error(ErrorKind::kInvalidInput, "F-score threshold must be positive");
  }
  for (const Plane& v : gt_visible.planes()) {
    if (!gt_all.contains(v)) {
      throw Error(ErrorKind::kInvalidInput,
                  "visible ground truth must be a subset of all ground truth");
    }
  }
  FscoreCounts counts;
  const Assignment matching = assign(angle_costs(pred, gt_all));
  for (const AssignmentPair& pair : matching.pairs) {
    if (pair.cost < threshold) {
      if (gt_visible.contains(gt_all[pair.col])) {
        ++counts.tp;
      } else {
        ++counts.nv;
      }
    }
  }
  counts.fp = pred.size() - counts.tp - counts.nv;
  counts.fn = gt_visible.size() - counts.tp;
  return counts;
}

double fscore(const PlaneSet& pred, const PlaneSet& gt_all,
              const PlaneSet& gt_visible, double threshold,
              const EmptySetPolicy& policy) {
  const FscoreCounts c = fscore_counts(pred, gt_all, gt_visible, threshold);
  const double denom = 2.0 * c.tp + c.fp + c.fn;
  if (denom == 0.0) return policy.fscore_when_empty;
  return 2.0 * c.tp / denom;
}

double max_plane_distance(const Plane& plane, std::span<const Vec3> cloud) {
  const auto c = coefficients(plane);
  return kernels::active().max_abs_signed_distance(xyz_data(cloud), cloud.size(),
                                                   c.data());
}

double dense_error(const Plane& pred, const Plane& gt,
                   std::span<const Vec3> cloud) {
  validate_plane(pred);
  validate_plane(gt);
  if (cloud.empty()) {
    throw Error(ErrorKind::kInvalidInput, "dense error needs a non-empty cloud");
  }
  const double rho = max_plane_distance(gt, cloud);
  if (!(rho > 0.0)) {
    throw Error(ErrorKind::kDegenerateConfiguration,
                "every cloud point lies on the ground-truth plane");
  }
  const auto a = coefficients(pred);
  const auto b = coefficients(gt);
  const double gap = kernels::active().reflection_gap_sum(
      xyz_data(cloud), cloud.size(), a.data(), b.data());
  return gap / static_cast<double>(cloud.size()) / rho;
}

double dense_error_set(const PlaneSet& pred, const PlaneSet& gt_all,
                       const PlaneSet& gt_visible, std::span<const Vec3> cloud) {
  if (pred.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "dense error of an empty prediction");
  }
  if (gt_all.empty()) {
    throw Error(ErrorKind::kInvalidInput, "dense error needs ground-truth planes");
  }
  if (gt_visible.empty()) {
    throw Error(ErrorKind::kUndefinedMetric,
                "dense completeness without visible ground truth");
  }
  double exact = 0.0;
  for (const Plane& p : pred.planes()) {
    double best = std::numeric_limits<double>::infinity();
    for (const Plane& g : gt_all.planes()) {
      best = std::min(best, dense_error(p, g, cloud));
    }
    exact += best;
  }
  exact /= static_cast<double>(pred.size());

  double complete = 0.0;
  for (const Plane& g : gt_visible.planes()) {
    double best = std::numeric_limits<double>::infinity();
    for (const Plane& p : pred.planes()) {
      best = std::min(best, dense_error(p, g, cloud));
    }
    complete += best;
  }
  complete /= static_cast<double>(gt_visible.size());
  return 0.5 * (exact + complete);
}

CropWindow central_crop(std::size_t width, std::size_t height, double fraction) {
  // 1 - 0.8 is slightly below 0.2 in binary; the slack keeps whole margins whole.
  const auto margin = [fraction](std::size_t extent) {
    return static_cast<std::size_t>(
        std::floor(0.5 * (1.0 - fraction) * static_cast<double>(extent) + 1e-9));
  };
  const std::size_t mu = margin(width), mv = margin(height);
  return {mu, width - mu, mv, height - mv};
}

bool visibility_filter(const DepthMap& depth, const CameraModel& camera,
                       const Plane& plane, const VisibilityOptions& options) {
  const CropWindow crop =
      central_crop(depth.width(), depth.height(), options.central_fraction);
  PointCloud points;
  for (std::size_t v = crop.v0; v < crop.v1; ++v) {
    for (std::size_t u = crop.u0; u < crop.u1; ++u) {
      if (!depth.is_valid(u, v)) continue;
      points.push_back(unproject_with_depth(camera, double(u), double(v),
                                            depth.depth(u, v)));
    }
  }
  if (points.size() < options.min_valid_pixels) return false;
  const auto c = coefficients(plane);
  const kernels::SideCounts sides =
      kernels::active().count_sides(xyz_data(points), points.size(), c.data());
  const double n_valid = static_cast<double>(points.size());
  const double prop_pos = static_cast<double>(sides.positive) / n_valid;
  const double prop_neg = static_cast<double>(sides.negative) / n_valid;
  return !(prop_pos < options.min_side_fraction ||
           prop_neg < options.min_side_fraction);
}

double matching_cost(const SignedDistanceMap& pred, const SignedDistanceMap& gt,
                     double alpha) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw Error(ErrorKind::kInvalidInput, "signed distance maps differ in size");
  }
  if (!pred.confidence) {
    throw Error(ErrorKind::kInvalidInput,
                "predicted signed distance map carries no confidence");
  }
  std::vector<double> xs, ys, cs;
  double log_sum = 0.0;
  const auto conf = pred.confidence->data();
  for (std::size_t i = 0; i < pred.sdf.size(); ++i) {
    if (!pred.valid.data()[i] || !gt.valid.data()[i]) continue;
    const double c = conf[i];
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw Error(ErrorKind::kInvalidInput, "confidence must be positive");
    }
    xs.push_back(pred.sdf.data()[i]);
    ys.push_back(gt.sdf.data()[i]);
    cs.push_back(c);
    log_sum += std::log(c);
  }
  const double l1 = kernels::active().weighted_l1(xs.data(), ys.data(),
                                                  cs.data(), xs.size());
  return l1 - alpha * log_sum;
}

CostMatrix matching_costs(const std::vector<SignedDistanceMap>& preds,
                          const std::vector<SignedDistanceMap>& gts,
                          double alpha) {
  CostMatrix costs(static_cast<Eigen::Index>(preds.size()),
                   static_cast<Eigen::Index>(gts.size()));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (std::size_t j = 0; j < gts.size(); ++j) {
      costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          matching_cost(preds[i], gts[j], alpha);
    }
  }
  return costs;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "median of an empty list");
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace symplane
