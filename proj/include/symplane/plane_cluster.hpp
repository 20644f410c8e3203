#pragma once

#include "symplane/geometry.hpp"

#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace symplane {

struct CandidatePlane {
  Plane plane;
  double weight = 1.0;
  std::string source_id;
};

struct PlaneCluster {
  Plane center;
  /// Indices into the candidate list, ascending.
  std::vector<std::size_t> members;
  double support = 0.0;
};

struct ClusterConfig {
  double eps = 1.0;
  std::size_t min_points = 20;
  double angle_scale = 5.0 * std::numbers::pi / 180.0;
  /// Scene units; see for_diameter().
  double offset_scale = 0.02;
  /// Worker threads for the neighbourhood computation; results do not
  /// depend on it.
  unsigned threads = 1;

  /// Defaults with the offset scale set to 2% of the scene diameter.
  static ClusterConfig for_diameter(double scene_diameter);
  void validate() const;
};

/// Distance between two planes as unoriented objects: the smaller of
///   angle(n_a, s n_b) / angle_scale + |d_a - s d_b| / offset_scale
/// over s = +1, -1. A pseudometric on planes that does not depend on which
/// of (n, d), (-n, -d) represents each plane.
double plane_distance(const Plane& a, const Plane& b, double angle_scale,
                      double offset_scale);

/// DBSCAN over plane_distance. Noise is dropped; clusters are sorted by
/// descending support, ties by smallest member index.
std::vector<PlaneCluster> cluster_planes(
    const std::vector<CandidatePlane>& candidates, const ClusterConfig& config);

/// Weighted centre of a set of planes: principal direction of
/// sum w n n^T and weighted median of sign-aligned offsets.
Plane cluster_center(const std::vector<CandidatePlane>& candidates,
                     const std::vector<std::size_t>& members);

}  // namespace symplane
