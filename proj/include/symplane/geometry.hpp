#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace symplane {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Reflection plane {x : n^T x + d = 0}.
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

using PointCloud = std::vector<Vec3>;

/// Row-major image grid; element (u, v) is column u of row v.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t width, std::size_t height, const T& fill = T{})
      : width_(width), height_(height), data_(width * height, fill) {}

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(long u, long v) const {
    return u >= 0 && v >= 0 && static_cast<std::size_t>(u) < width_ &&
           static_cast<std::size_t>(v) < height_;
  }

  T& operator()(std::size_t u, std::size_t v) { return data_[v * width_ + u]; }
  const T& operator()(std::size_t u, std::size_t v) const {
    return data_[v * width_ + u];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> data_;
};

/// Per-pixel 3D points. Entries with valid == 0 are never read.
struct PointMap {
  Grid<Vec3> points;
  Grid<unsigned char> valid;

  PointMap() = default;
  PointMap(std::size_t width, std::size_t height)
      : points(width, height, Vec3::Zero()), valid(width, height, 0) {}

  std::size_t width() const { return points.width(); }
  std::size_t height() const { return points.height(); }
  std::size_t valid_count() const;
};

/// Depth along the camera z axis; NaN marks pixels without depth.
struct DepthMap {
  Grid<double> depth;

  DepthMap() = default;
  DepthMap(std::size_t width, std::size_t height);

  std::size_t width() const { return depth.width(); }
  std::size_t height() const { return depth.height(); }
  bool is_valid(std::size_t u, std::size_t v) const;
};

/// Pinhole camera with world-to-camera extrinsics: x_cam = R * x_world + t.
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 center() const { return -rotation.transpose() * translation; }
};

struct SignedDistanceMap {
  Grid<double> sdf;
  std::optional<Grid<double>> confidence;
  Grid<unsigned char> valid;

  SignedDistanceMap() = default;
  SignedDistanceMap(std::size_t width, std::size_t height)
      : sdf(width, height, 0.0), valid(width, height, 0) {}

  std::size_t width() const { return sdf.width(); }
  std::size_t height() const { return sdf.height(); }
};

struct PixelProjection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

// Plane operations.
void validate_plane(const Plane& plane);
Plane canonicalize(const Plane& plane);
bool is_canonical(const Plane& plane, double tol = 1e-12);
Vec3 reflect_point(const Plane& plane, const Vec3& p);
double signed_distance(const Plane& plane, const Vec3& p);
PointCloud reflect_cloud(const Plane& plane, std::span<const Vec3> cloud);

/// Linear part H = I - 2 n n^T and translation -2 d n of the reflection map.
Mat3 reflection_linear(const Plane& plane);

// Camera operations.
void validate_camera(const CameraModel& camera);
Vec3 unproject(const DepthMap& depth, const CameraModel& camera, long u,
               long v);
Vec3 unproject_with_depth(const CameraModel& camera, double u, double v,
                          double depth);
PixelProjection project(const CameraModel& camera, const Vec3& world);

/// All valid depth pixels unprojected into a world-space point map.
PointMap unproject_depth_map(const DepthMap& depth, const CameraModel& camera);

SignedDistanceMap signed_distance_map(const PointMap& points,
                                      const Plane& plane);

/// Maximum pairwise distance; bounding-box diagonal above `exact_limit`
/// points, where the quadratic scan stops being worth it.
double diameter(std::span<const Vec3> points, std::size_t exact_limit = 4096);

/// Flat x,y,z view used by the kernels.
inline const double* xyz_data(std::span<const Vec3> points) {
  static_assert(sizeof(Vec3) == 3 * sizeof(double));
  return points.empty() ? nullptr : points.data()->data();
}

}  // namespace symplane
