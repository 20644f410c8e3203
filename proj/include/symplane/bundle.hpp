#pragma once

#include "symplane/formats.hpp"
#include "symplane/geometry.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace symplane {

struct BundleImage {
  std::string id;
  CameraModel camera;
  DepthMap depth;
};

/// One scene on disk:
///   bundle.json              manifest
///   cameras/<id>.json        camera per image
///   depths/<id>.symd         depth map per image
///   correspondences.jsonl    correspondence records
///   cloud.ply                scene cloud (optional)
///   ground_truth.json        reference planes (optional)
///   planes.json              annotated planes (optional)
///   predictions/<id>.json    predicted planes per image (optional)
struct SceneBundle {
  std::vector<BundleImage> images;
  std::vector<CorrespondenceRecord> records;
  PointCloud cloud;
  std::optional<std::vector<PlaneRecord>> ground_truth;
  std::vector<PlaneRecord> annotated;
  std::map<std::string, std::vector<Plane>> predictions;
  /// Scene scale for offsets; computed from the cloud or the depth maps
  /// when zero.
  double diameter = 0.0;

  const BundleImage& image(const std::string& id) const;
  /// Unique ids, known record images, in-bounds match coordinates.
  void validate() const;
  /// The stored diameter, or one estimated from the available geometry.
  double scene_diameter() const;
};

SceneBundle load_bundle(const std::string& dir);
void save_bundle(const std::string& dir, const SceneBundle& bundle);

}  // namespace symplane
