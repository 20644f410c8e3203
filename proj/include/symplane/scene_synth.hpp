#pragma once

#include "symplane/geometry.hpp"
#include "symplane/plane_fit.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace symplane {

enum class ShapeKind { kBoxFacade, kCrossPlan, kOctagonTower };

std::string_view to_string(ShapeKind shape);
std::optional<ShapeKind> parse_shape(std::string_view name);

struct SceneSpec {
  ShapeKind shape = ShapeKind::kBoxFacade;
  /// 1, 2 or 4 for every shape; 8 only for the octagon tower.
  int symmetry_count = 1;
  double diameter = 20.0;
  /// Isotropic cloud noise as a fraction of the diameter.
  double noise_sigma = 0.0;
  /// Fraction of cloud points replaced by uniform points in the bounding box.
  double outlier_fraction = 0.0;
  std::uint64_t seed = 0;
  /// Orbiting cameras in addition to one frontal camera per plane.
  int camera_count = 4;
  std::size_t width = 128;
  std::size_t height = 96;
  /// Approximate size of the sampled cloud.
  std::size_t point_count = 20000;

  void validate() const;
};

/// Vertical extrusion of a simple polygon (counter-clockwise footprint).
struct Prism {
  std::vector<Eigen::Vector2d> footprint;
  double z0 = 0.0;
  double z1 = 1.0;

  bool contains(const Vec3& p, double tol) const;
};

struct GroundTruthScene {
  SceneSpec spec;
  /// Exactly symmetric samples of the surface.
  PointCloud clean_cloud;
  /// clean_cloud with the spec's noise and outliers applied.
  PointCloud cloud;
  std::vector<Plane> planes;
  /// One frontal camera on each plane (its own mirror image) followed by
  /// spec.camera_count orbiting cameras.
  std::vector<CameraModel> cameras;
  std::vector<DepthMap> depths;
  std::vector<Prism> solids;
  double diameter = 0.0;
  double height = 0.0;

  /// Distance from p to the union's surface (side walls and roofs).
  double surface_distance(const Vec3& p) const;
  DepthMap render(const CameraModel& camera) const;
};

GroundTruthScene generate_scene(const SceneSpec& spec);

/// The camera whose image is the horizontal mirror of `camera`'s image
/// reflected across `plane`: pixel (u, v) of `camera` and pixel
/// (W - 1 - u, v) of the result see reflected points. Requires
/// cx = (W - 1) / 2 for the pixel grids to coincide.
CameraModel mirror_camera(const CameraModel& camera, const Plane& plane);

/// Pinhole camera at `position` looking at `target` with +z up.
CameraModel look_at(const Vec3& position, const Vec3& target,
                    std::size_t width, std::size_t height, double fov_deg);

/// Pairs (p, R(p) + noise) from cloud samples, with a fraction of second
/// points replaced by uniform points in the scene bounding box.
PointPairSet sample_correspondences(const GroundTruthScene& scene,
                                    std::size_t plane_index, std::size_t count,
                                    double noise_sigma, double outlier_fraction,
                                    std::uint64_t seed);

}  // namespace symplane
