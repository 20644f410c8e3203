#pragma once

#include "symplane/geometry.hpp"
#include "symplane/plane_fit.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace symplane {

struct PlaneRecord {
  Plane plane;
  double support = 0.0;
};

/// Pixel matches between image a and the horizontally flipped image b.
struct CorrespondenceRecord {
  std::string image_a;
  std::string image_b;
  bool flipped_b = true;
  /// (u_a, v_a, u_b, v_b); the b coordinates are in the flipped image when
  /// flipped_b is set.
  std::vector<std::array<long, 4>> matches;
};

// Plane lists: {"planes": [{"normal": [x, y, z], "offset": d, "support": s}]}
std::string planes_to_json(const std::vector<PlaneRecord>& planes);
std::vector<PlaneRecord> planes_from_json(const std::string& text);
void write_planes(const std::string& path, const std::vector<PlaneRecord>& planes);
std::vector<PlaneRecord> read_planes(const std::string& path);

void write_camera(const std::string& path, const CameraModel& camera);
CameraModel read_camera(const std::string& path);

/// SYMD container: magic "SYMD", u16 version, u32 width, u32 height, then
/// width * height little-endian float32 values in row-major order.
void write_symd(const std::string& path, const Grid<double>& values);
Grid<double> read_symd(const std::string& path);
void write_depth(const std::string& path, const DepthMap& depth);
DepthMap read_depth(const std::string& path);

/// Binary little-endian PLY with float xyz and an optional float
/// "confidence" property. Point maps store every pixel in row-major order
/// with NaN coordinates at invalid pixels and record the grid size in a
/// "comment grid W H" header line.
struct PlyCloud {
  PointCloud points;
  std::vector<double> confidence;
  std::size_t grid_width = 0;
  std::size_t grid_height = 0;
};
void write_ply(const std::string& path, const PlyCloud& cloud);
PlyCloud read_ply(const std::string& path);
void write_point_map(const std::string& path, const PointMap& map);
PointMap read_point_map(const std::string& path);
/// Valid points of a PLY file, whether or not it carries a grid.
PointCloud read_cloud(const std::string& path);

/// One JSON object per line.
void write_correspondences(const std::string& path,
                           const std::vector<CorrespondenceRecord>& records);
std::vector<CorrespondenceRecord> read_correspondences(const std::string& path);

/// Whitespace-separated "ax ay az bx by bz" lines; '#' starts a comment.
void write_pairs(const std::string& path, const PointPairSet& pairs);
PointPairSet read_pairs(const std::string& path);

/// Detector output for one image: a point map and per-instance signed
/// distance and confidence maps with classification logits. Paths are
/// relative to the manifest.
struct PredictionInstance {
  std::string sdf;
  std::string confidence;
  double logit = 0.0;
};
struct PredictionManifest {
  std::string point_map;
  std::vector<PredictionInstance> instances;
};
PredictionManifest read_prediction_manifest(const std::string& path);
void write_prediction_manifest(const std::string& path,
                               const PredictionManifest& manifest);

std::string read_text(const std::string& path);
/// Writes through a temporary file renamed into place.
void write_text(const std::string& path, const std::string& text);

}  // namespace symplane
