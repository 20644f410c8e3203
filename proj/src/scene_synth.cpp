#include "symplane/scene_synth.hpp"

#include "symplane/error.hpp"
#include "symplane/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace symplane {
namespace {

using Vec2 = Eigen::Vector2d;
constexpr double kPi = std::numbers::pi;
constexpr double kFovDeg = 60.0;
constexpr double kCameraDistance = 1.3;  // multiples of the diameter

Prism box(double x0, double x1, double y0, double y1, double z0, double z1) {
  return {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}, z0, z1};
}

Prism octagon(const std::vector<double>& vertex_angles_deg, double x_stretch,
              double z1) {
  Prism p;
  for (double a : vertex_angles_deg) {
    const double r = a * kPi / 180.0;
    p.footprint.emplace_back(x_stretch * std::cos(r), std::sin(r));
  }
  p.z1 = z1;
  return p;
}

struct ShapeLayout {
  std::vector<Prism> solids;
  /// Directions (degrees from +x) of the vertical mirror lines.
  std::vector<double> mirror_lines;
};

// Unit-sized layouts; each has exactly the listed mirror symmetries.
ShapeLayout layout_for(ShapeKind shape, int k) {
  ShapeLayout out;
  switch (shape) {
    case ShapeKind::kBoxFacade: {
      if (k == 4) {
        out.solids.push_back(box(-0.8, 0.8, -0.8, 0.8, 0.0, 1.0));
        out.mirror_lines = {0.0, 45.0, 90.0, 135.0};
      } else {
        out.solids.push_back(box(-1.0, 1.0, -0.6, 0.6, 0.0, 1.0));
        out.mirror_lines = {90.0};
        if (k == 2) {
          out.mirror_lines.push_back(0.0);
        } else {
          // Porch on the front face breaks the front-back symmetry.
          out.solids.push_back(box(-0.3, 0.3, 0.6, 0.9, 0.0, 0.5));
        }
      }
      break;
    }
    case ShapeKind::kCrossPlan: {
      const double w = 0.3;
      const double lx = 1.0;
      const double ly = k == 4 ? 1.0 : 0.7;
      out.solids.push_back(
          {{{lx, -w}, {lx, w}, {w, w}, {w, ly}, {-w, ly}, {-w, w}, {-lx, w},
            {-lx, -w}, {-w, -w}, {-w, -ly}, {w, -ly}, {w, -w}},
           0.0, 0.8});
      if (k == 4) {
        out.mirror_lines = {0.0, 45.0, 90.0, 135.0};
      } else {
        out.mirror_lines = {90.0};
        if (k == 2) {
          out.mirror_lines.push_back(0.0);
        } else {
          out.solids.push_back(box(-0.2, 0.2, ly, ly + 0.2, 0.0, 0.4));
        }
      }
      break;
    }
    case ShapeKind::kOctagonTower: {
      std::vector<double> angles;
      double stretch = 1.0;
      if (k == 8) {
        for (int j = 0; j < 8; ++j) angles.push_back(22.5 + 45.0 * j);
        for (int j = 0; j < 8; ++j) out.mirror_lines.push_back(22.5 * j);
      } else if (k == 4) {
        // Alternating side lengths keep only the side-bisecting mirrors.
        for (int m = 0; m < 4; ++m) {
          angles.push_back(90.0 * m - 15.0);
          angles.push_back(90.0 * m + 15.0);
        }
        out.mirror_lines = {0.0, 45.0, 90.0, 135.0};
      } else {
        for (int j = 0; j < 8; ++j) angles.push_back(22.5 + 45.0 * j);
        stretch = 1.3;
        out.mirror_lines = {90.0};
        if (k == 2) out.mirror_lines.push_back(0.0);
      }
      out.solids.push_back(octagon(angles, stretch, 1.5));
      if (k == 1) {
        const double top = std::sin(67.5 * kPi / 180.0);
        out.solids.push_back(box(-0.2, 0.2, top, top + 0.3, 0.0, 0.6));
      }
      break;
    }
  }
  return out;
}

double polygon_area(const std::vector<Vec2>& poly) {
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(area);
}

bool inside_polygon(const std::vector<Vec2>& poly, double x, double y) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > y) != (b.y() > y) &&
        x < (b.x() - a.x()) * (y - a.y()) / (b.y() - a.y()) + a.x()) {
      inside = !inside;
    }
  }
  return inside;
}

double segment_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double t = std::clamp((p - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * e)).norm();
}

// Closure of the group generated by the reflections' linear parts.
std::vector<Mat3> dihedral_group(const std::vector<Plane>& planes) {
  std::vector<Mat3> group{Mat3::Identity()};
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (const Plane& plane : planes) {
      const Mat3 next = reflection_linear(plane) * group[i];
      const bool known = std::any_of(group.begin(), group.end(), [&](const Mat3& g) {
        return (g - next).cwiseAbs().maxCoeff() < 1e-9;
      });
      if (!known) group.push_back(next);
    }
  }
  return group;
}

struct Face {
  enum Kind { kWall, kRoof } kind;
  std::size_t solid;
  std::size_t edge;
  double area;
};

Vec3 sample_face(const Prism& prism, const Face& face, CounterRng& rng) {
  if (face.kind == Face::kWall) {
    const Vec2& a = prism.footprint[face.edge];
    const Vec2& b = prism.footprint[(face.edge + 1) % prism.footprint.size()];
    const Vec2 xy = a + rng.uniform() * (b - a);
    return {xy.x(), xy.y(), rng.uniform(prism.z0, prism.z1)};
  }
  Vec2 lo = prism.footprint[0], hi = prism.footprint[0];
  for (const Vec2& v : prism.footprint) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  for (;;) {
    const double x = rng.uniform(lo.x(), hi.x());
    const double y = rng.uniform(lo.y(), hi.y());
    if (inside_polygon(prism.footprint, x, y)) return {x, y, prism.z1};
  }
}

}  // namespace

std::string_view to_string(ShapeKind shape) {
  switch (shape) {
    case ShapeKind::kBoxFacade: return "box-facade";
    case ShapeKind::kCrossPlan: return "cross-plan";
    case ShapeKind::kOctagonTower: return "octagon-tower";
  }
  return "unknown";
}

std::optional<ShapeKind> parse_shape(std::string_view name) {
  for (ShapeKind s : {ShapeKind::kBoxFacade, ShapeKind::kCrossPlan,
                      ShapeKind::kOctagonTower}) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

void SceneSpec::validate() const {
  const int k = symmetry_count;
  const bool k_ok = k == 1 || k == 2 || k == 4 ||
                    (k == 8 && shape == ShapeKind::kOctagonTower);
  if (!k_ok) {
    throw Error(ErrorKind::kInvalidInput,
                "symmetry count " + std::to_string(k) + " is not available for " +
                    std::string(to_string(shape)));
  }
  if (!(diameter > 0.0) || !(noise_sigma >= 0.0) || !(outlier_fraction >= 0.0) ||
      !(outlier_fraction < 1.0) || camera_count < 0 || width < 2 || height < 2 ||
      point_count == 0) {
    throw Error(ErrorKind::kInvalidInput, "scene spec out of range");
  }
}

bool Prism::contains(const Vec3& p, double tol) const {
  if (p.z() < z0 - tol || p.z() > z1 + tol) return false;
  if (inside_polygon(footprint, p.x(), p.y())) return true;
  for (std::size_t i = 0; i < footprint.size(); ++i) {
    if (segment_distance_2d(p.head<2>(), footprint[i],
                            footprint[(i + 1) % footprint.size()]) <= tol) {
      return true;
    }
  }
  return false;
}

double GroundTruthScene::surface_distance(const Vec3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Prism& prism : solids) {
    const auto& fp = prism.footprint;
    for (std::size_t i = 0; i < fp.size(); ++i) {
      const Vec2& a = fp[i];
      const Vec2 e = fp[(i + 1) % fp.size()] - a;
      const double s = std::clamp((p.head<2>() - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
      const Vec2 q = a + s * e;
      const double z = std::clamp(p.z(), prism.z0, prism.z1);
      best = std::min(best, (p - Vec3(q.x(), q.y(), z)).norm());
    }
    if (inside_polygon(fp, p.x(), p.y())) {
      best = std::min(best, std::abs(p.z() - prism.z1));
    }
  }
  return best;
}

DepthMap GroundTruthScene::render(const CameraModel& camera) const {
  DepthMap out(spec.width, spec.height);
  const Vec3 origin = camera.center();
  const Mat3 rt = camera.rotation.transpose();
  for (std::size_t v = 0; v < spec.height; ++v) {
    for (std::size_t u = 0; u < spec.width; ++u) {
      // Direction with unit camera-z component, so the hit parameter is depth.
      const Vec3 dir = rt * Vec3((double(u) - camera.cx) / camera.fx,
                                 (double(v) - camera.cy) / camera.fy, 1.0);
      double best = std::numeric_limits<double>::infinity();
      for (const Prism& prism : solids) {
        const auto& fp = prism.footprint;
        for (std::size_t i = 0; i < fp.size(); ++i) {
          const Vec2& a = fp[i];
          const Vec2 e = fp[(i + 1) % fp.size()] - a;
          const double det = -dir.x() * e.y() + e.x() * dir.y();
          if (std::abs(det) < 1e-14) continue;
          const Vec2 w = a - origin.head<2>();
          const double t = (w.x() * -e.y() + e.x() * w.y()) / det;
          const double s = (dir.x() * w.y() - dir.y() * w.x()) / det;
          if (s < 0.0 || s > 1.0 || t <= 1e-9 || t >= best) continue;
          const double z = origin.z() + t * dir.z();
          if (z < prism.z0 || z > prism.z1) continue;
          best = t;
        }
        if (std::abs(dir.z()) > 1e-14) {
          const double t = (prism.z1 - origin.z()) / dir.z();
          if (t > 1e-9 && t < best) {
            const Vec3 hit = origin + t * dir;
            if (inside_polygon(fp, hit.x(), hit.y())) best = t;
          }
        }
      }
      if (std::isfinite(best)) out.depth(u, v) = best;
    }
  }
  return out;
}

CameraModel look_at(const Vec3& position, const Vec3& target, std::size_t width,
                    std::size_t height, double fov_deg) {
  const Vec3 forward = (target - position).normalized();
  const Vec3 right = forward.cross(Vec3::UnitZ()).normalized();
  const Vec3 down = forward.cross(right);
  CameraModel cam;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * position;
  cam.fx = cam.fy = 0.5 * double(width) / std::tan(0.5 * fov_deg * kPi / 180.0);
  cam.cx = 0.5 * (double(width) - 1.0);
  cam.cy = 0.5 * (double(height) - 1.0);
  return cam;
}

CameraModel mirror_camera(const CameraModel& camera, const Plane& plane) {
  Mat3 flip = Mat3::Identity();
  flip(0, 0) = -1.0;
  CameraModel out = camera;
  out.rotation = flip * camera.rotation * reflection_linear(plane);
  out.translation =
      flip * (camera.translation - 2.0 * plane.offset * (camera.rotation * plane.normal));
  return out;
}

GroundTruthScene generate_scene(const SceneSpec& spec) {
  spec.validate();
  GroundTruthScene scene;
  scene.spec = spec;
  ShapeLayout layout = layout_for(spec.shape, spec.symmetry_count);

  std::vector<Vec3> corners;
  for (const Prism& p : layout.solids) {
    for (const Vec2& v : p.footprint) {
      corners.emplace_back(v.x(), v.y(), p.z0);
      corners.emplace_back(v.x(), v.y(), p.z1);
    }
  }
  const double scale = spec.diameter / diameter(corners);
  for (Prism& p : layout.solids) {
    for (Vec2& v : p.footprint) v *= scale;
    p.z0 *= scale;
    p.z1 *= scale;
    scene.height = std::max(scene.height, p.z1);
  }
  scene.solids = layout.solids;
  scene.diameter = spec.diameter;

  for (double line : layout.mirror_lines) {
    const double r = line * kPi / 180.0;
    scene.planes.push_back(canonicalize(Plane{Vec3(-std::sin(r), std::cos(r), 0.0), 0.0}));
  }

  // Surface samples, symmetrised by their orbit under the symmetry group.
  const std::vector<Mat3> group = dihedral_group(scene.planes);
  std::vector<Face> faces;
  double total_area = 0.0;
  for (std::size_t s = 0; s < scene.solids.size(); ++s) {
    const Prism& p = scene.solids[s];
    for (std::size_t e = 0; e < p.footprint.size(); ++e) {
      const double len = (p.footprint[(e + 1) % p.footprint.size()] - p.footprint[e]).norm();
      faces.push_back({Face::kWall, s, e, len * (p.z1 - p.z0)});
    }
    faces.push_back({Face::kRoof, s, 0, polygon_area(p.footprint)});
  }
  for (const Face& f : faces) total_area += f.area;

  CounterRng sampler(spec.seed, 1);
  const std::size_t base_count =
      (spec.point_count + group.size() - 1) / group.size();
  const double tol = 1e-9 * spec.diameter;
  std::size_t accepted = 0;
  while (accepted < base_count) {
    double pick = sampler.uniform() * total_area;
    std::size_t f = 0;
    while (f + 1 < faces.size() && pick >= faces[f].area) pick -= faces[f++].area;
    const Vec3 p = sample_face(scene.solids[faces[f].solid], faces[f], sampler);
    bool hidden = false;
    for (std::size_t s = 0; s < scene.solids.size() && !hidden; ++s) {
      hidden = s != faces[f].solid && scene.solids[s].contains(p, tol);
    }
    if (hidden) continue;
    for (const Mat3& g : group) scene.clean_cloud.push_back(g * p);
    ++accepted;
  }

  scene.cloud = scene.clean_cloud;
  if (spec.noise_sigma > 0.0) {
    CounterRng noise(spec.seed, 2);
    const double sigma = spec.noise_sigma * spec.diameter;
    for (Vec3& p : scene.cloud) {
      const double nx = noise.normal(), ny = noise.normal(), nz = noise.normal();
      p += sigma * Vec3(nx, ny, nz);
    }
  }

  if (spec.outlier_fraction > 0.0) {
    Vec3 lo = scene.clean_cloud[0], hi = scene.clean_cloud[0];
    for (const Vec3& p : scene.clean_cloud) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    CounterRng clutter(spec.seed, 4);
    for (Vec3& p : scene.cloud) {
      if (clutter.uniform() >= spec.outlier_fraction) continue;
      const double ux = clutter.uniform(), uy = clutter.uniform(), uz = clutter.uniform();
      p = lo + Vec3(ux, uy, uz).cwiseProduct(hi - lo);
    }
  }

  const double target_z = 0.5 * scene.height;
  const Vec3 target(0.0, 0.0, target_z);
  const double radius = kCameraDistance * spec.diameter;
  for (const Plane& plane : scene.planes) {
    const Vec3 along = Vec3::UnitZ().cross(plane.normal).normalized();
    scene.cameras.push_back(look_at(radius * along + target, target, spec.width,
                                    spec.height, kFovDeg));
  }
  CounterRng placement(spec.seed, 3);
  for (int i = 0; i < spec.camera_count; ++i) {
    const double azimuth = placement.uniform(0.0, 2.0 * kPi);
    const double z = placement.uniform(0.3, 0.9) * scene.height;
    const Vec3 pos(radius * std::cos(azimuth), radius * std::sin(azimuth), z);
    scene.cameras.push_back(look_at(pos, target, spec.width, spec.height, kFovDeg));
  }
  for (const CameraModel& cam : scene.cameras) scene.depths.push_back(scene.render(cam));
  return scene;
}

PointPairSet sample_correspondences(const GroundTruthScene& scene,
                                    std::size_t plane_index, std::size_t count,
                                    double noise_sigma, double outlier_fraction,
                                    std::uint64_t seed) {
  if (plane_index >= scene.planes.size()) {
    throw Error(ErrorKind::kInvalidInput, "plane index out of range");
  }
  if (count < 3) {
    throw Error(ErrorKind::kInvalidInput, "need at least 3 correspondences");
  }
  if (scene.clean_cloud.empty()) {
    throw Error(ErrorKind::kInvalidInput, "scene has no points");
  }
  Vec3 lo = scene.clean_cloud[0], hi = scene.clean_cloud[0];
  for (const Vec3& p : scene.clean_cloud) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Plane& plane = scene.planes[plane_index];
  const double sigma = noise_sigma * scene.diameter;
  CounterRng rng(seed, 0x434f5252ULL + plane_index);
  PointPairSet pairs;
  for (std::size_t k = 0; k < count; ++k) {
    const Vec3& p = scene.clean_cloud[rng.below(scene.clean_cloud.size())];
    Vec3 q = reflect_point(plane, p);
    if (sigma > 0.0) {
      const double nx = rng.normal(), ny = rng.normal(), nz = rng.normal();
      q += sigma * Vec3(nx, ny, nz);
    }
    if (rng.uniform() < outlier_fraction) {
      const double ux = rng.uniform(), uy = rng.uniform(), uz = rng.uniform();
      q = lo + Vec3(ux, uy, uz).cwiseProduct(hi - lo);
    }
    pairs.add(p, q);
  }
  return pairs;
}

}  // namespace symplane
