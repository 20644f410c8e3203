#include "symplane/geometry.hpp"

#include "symplane/error.hpp"
#include "symplane/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace symplane {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidInput: return "invalid-input";
    case ErrorKind::kInvalidPlane: return "invalid-plane";
    case ErrorKind::kInsufficientData: return "insufficient-data";
    case ErrorKind::kDegenerateConfiguration: return "degenerate-configuration";
    case ErrorKind::kUndefinedMetric: return "undefined-metric";
    case ErrorKind::kNoDepth: return "no-depth";
    case ErrorKind::kOutOfBounds: return "out-of-bounds";
    case ErrorKind::kInvalidBundle: return "invalid-bundle";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

std::size_t PointMap::valid_count() const {
  std::size_t n = 0;
  for (unsigned char v : valid.data()) n += v != 0;
  return n;
}

DepthMap::DepthMap(std::size_t width, std::size_t height)
    : depth(width, height, std::numeric_limits<double>::quiet_NaN()) {}

bool DepthMap::is_valid(std::size_t u, std::size_t v) const {
  const double z = depth(u, v);
  return std::isfinite(z) && z > 0.0;
}

void validate_plane(const Plane& plane) {
  if (!plane.normal.allFinite() || !std::isfinite(plane.offset)) {
    throw Error(ErrorKind::kInvalidPlane, "plane has non-finite parameters");
  }
  if (std::abs(plane.normal.norm() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidPlane, "plane normal is not unit length");
  }
}

Plane canonicalize(const Plane& plane) {
  const double norm = plane.normal.norm();
  if (!(norm > 0.0) || !std::isfinite(norm) || !std::isfinite(plane.offset)) {
    throw Error(ErrorKind::kInvalidPlane,
                "cannot canonicalize a plane with zero or non-finite normal");
  }
  // Already-unit normals are kept as they are so canonicalize is idempotent.
  const bool unit = std::abs(norm - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon();
  Plane out = unit ? plane : Plane{plane.normal / norm, plane.offset / norm};
  int largest = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(out.normal[i]) > std::abs(out.normal[largest])) largest = i;
  }
  if (out.normal[largest] < 0.0) {
    out.normal = -out.normal;
    out.offset = -out.offset;
  }
  // -0.0 would break byte-identical output for otherwise equal planes.
  for (int i = 0; i < 3; ++i) out.normal[i] += 0.0;
  out.offset += 0.0;
  return out;
}

bool is_canonical(const Plane& plane, double tol) {
  if (std::abs(plane.normal.norm() - 1.0) > tol) return false;
  int largest = 0;
  for (int i = 1; i < 3; ++i) {
    if (std::abs(plane.normal[i]) > std::abs(plane.normal[largest])) largest = i;
  }
  return plane.normal[largest] > 0.0;
}

Vec3 reflect_point(const Plane& plane, const Vec3& p) {
  return p - 2.0 * signed_distance(plane, p) * plane.normal;
}

double signed_distance(const Plane& plane, const Vec3& p) {
  return plane.normal.dot(p) + plane.offset;
}

PointCloud reflect_cloud(const Plane& plane, std::span<const Vec3> cloud) {
  validate_plane(plane);
  PointCloud out;
  out.reserve(cloud.size());
  for (const Vec3& p : cloud) out.push_back(reflect_point(plane, p));
  return out;
}

Mat3 reflection_linear(const Plane& plane) {
  return Mat3::Identity() - 2.0 * plane.normal * plane.normal.transpose();
}

void validate_camera(const CameraModel& camera) {
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0) || !std::isfinite(camera.cx) ||
      !std::isfinite(camera.cy)) {
    throw Error(ErrorKind::kInvalidInput, "camera intrinsics are invalid");
  }
  const Mat3& r = camera.rotation;
  if (!r.allFinite() || !camera.translation.allFinite() ||
      (r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
      std::abs(r.determinant() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidInput,
                "camera rotation is not a proper orthonormal matrix");
  }
}

Vec3 unproject_with_depth(const CameraModel& camera, double u, double v,
                          double depth) {
  const Vec3 x_cam(depth * (u - camera.cx) / camera.fx,
                   depth * (v - camera.cy) / camera.fy, depth);
  return camera.rotation.transpose() * (x_cam - camera.translation);
}

Vec3 unproject(const DepthMap& depth, const CameraModel& camera, long u,
               long v) {
  if (!depth.depth.contains(u, v)) {
    throw Error(ErrorKind::kOutOfBounds, "pixel outside the depth map");
  }
  if (!depth.is_valid(u, v)) {
    throw Error(ErrorKind::kNoDepth, "pixel has no valid depth");
  }
  return unproject_with_depth(camera, static_cast<double>(u),
                              static_cast<double>(v), depth.depth(u, v));
}

PixelProjection project(const CameraModel& camera, const Vec3& world) {
  const Vec3 x = camera.rotation * world + camera.translation;
  return {camera.fx * x.x() / x.z() + camera.cx,
          camera.fy * x.y() / x.z() + camera.cy, x.z()};
}

PointMap unproject_depth_map(const DepthMap& depth, const CameraModel& camera) {
  PointMap out(depth.width(), depth.height());
  for (std::size_t v = 0; v < depth.height(); ++v) {
    for (std::size_t u = 0; u < depth.width(); ++u) {
      if (!depth.is_valid(u, v)) continue;
      out.points(u, v) = unproject_with_depth(camera, double(u), double(v),
                                              depth.depth(u, v));
      out.valid(u, v) = 1;
    }
  }
  return out;
}

SignedDistanceMap signed_distance_map(const PointMap& points,
                                      const Plane& plane) {
  validate_plane(plane);
  SignedDistanceMap out(points.width(), points.height());
  const double coeffs[4] = {plane.normal.x(), plane.normal.y(),
                            plane.normal.z(), plane.offset};
  const auto& table = kernels::active();
  std::span<const Vec3> flat = points.points.data();
  table.signed_distances(xyz_data(flat), flat.size(), coeffs,
                         out.sdf.data().data());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const bool ok = points.valid.data()[i] != 0;
    out.valid.data()[i] = ok;
    if (!ok) out.sdf.data()[i] = 0.0;
  }
  return out;
}

double diameter(std::span<const Vec3> points, std::size_t exact_limit) {
  if (points.size() < 2) return 0.0;
  if (points.size() <= exact_limit) {
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) {
        best = std::max(best, (points[i] - points[j]).squaredNorm());
      }
    }
    return std::sqrt(best);
  }
  Vec3 lo = points[0], hi = points[0];
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

}  // namespace symplane
