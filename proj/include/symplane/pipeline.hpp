#pragma once

#include "symplane/bundle.hpp"
#include "symplane/config.hpp"
#include "symplane/metrics.hpp"
#include "symplane/plane_cluster.hpp"
#include "symplane/plane_fit.hpp"
#include "symplane/scene_synth.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace symplane {

/// Column in the original image of column `u_flipped` of its horizontal
/// mirror.
long unflip(long u_flipped, std::size_t width);

/// 3D pairs (point seen in a, point seen in b) of one record. Matches
/// without depth on either side are dropped.
PointPairSet record_pairs(const SceneBundle& bundle,
                          const CorrespondenceRecord& record);

struct AnnotationResult {
  std::vector<CandidatePlane> candidates;
  std::vector<PlaneCluster> clusters;
  /// One line per skipped record.
  std::vector<std::string> log;
};

/// Fits one candidate plane per pair set (RANSAC per the config, seeded per
/// index) and clusters the candidates. Failed fits are logged and skipped.
AnnotationResult annotate_pairs(const std::vector<PointPairSet>& records,
                                double diameter, const PipelineConfig& config);

/// annotate_pairs over the bundle's correspondence records. Stores the
/// cluster centres in bundle.annotated.
AnnotationResult annotate_scene(SceneBundle& bundle,
                                const PipelineConfig& config);

struct SdfPlanes {
  std::vector<FitReport> fits;
  /// Index of the instance each fit came from.
  std::vector<std::size_t> instances;
  std::vector<std::string> warnings;
};

/// Planes from detector output: instances with logit >= threshold, pixels
/// whose confidence reaches the instance's confidence quantile.
SdfPlanes planes_from_prediction(const PointMap& point_map,
                                 const std::vector<SignedDistanceMap>& sdf_maps,
                                 const std::vector<double>& logits,
                                 double logit_threshold,
                                 double confidence_quantile,
                                 bool confidence_weighting = false);

/// Reflection closure of the points: every composition of up to
/// `closure_depth` plane reflections applied to every point, with points
/// closer than 1e-9 merged. Input points come first.
PointCloud complete_cloud(std::span<const Vec3> points,
                          const std::vector<Plane>& planes,
                          int closure_depth = 2);
PointCloud complete_cloud(const PointMap& point_map,
                          const std::vector<Plane>& planes,
                          int closure_depth = 2);

struct ImageEvaluation {
  std::string id;
  bool evaluated = false;
  std::string note;
  std::size_t predicted = 0;
  std::size_t visible = 0;
  EvalReport report;
};

struct SceneEvaluation {
  std::vector<ImageEvaluation> images;
  std::size_t evaluated_images = 0;
  double median_geodesic = 0.0;
  double median_dense_error = 0.0;
  std::map<double, double> mean_fscore;
};

/// Per-image metrics against the bundle's ground truth and per-scene
/// aggregates. Uses `shared_predictions` for every image when given,
/// otherwise the bundle's per-image predictions.
SceneEvaluation evaluate_scene(const SceneBundle& bundle,
                               const PipelineConfig& config,
                               const std::vector<Plane>* shared_predictions = nullptr);
std::string evaluation_to_json(const SceneEvaluation& evaluation);

struct SynthBundleOptions {
  std::size_t matches_per_record = 500;
  /// Fraction of matches whose b pixel is replaced by a random one.
  double match_outlier_fraction = 0.0;
  std::uint64_t seed = 0;
};

/// Bundle of a synthetic scene: its cameras, a mirrored partner image per
/// orbiting camera and plane, one within-view record per frontal camera and
/// one cross-view record per partner image.
SceneBundle bundle_from_scene(const GroundTruthScene& scene,
                              const SynthBundleOptions& options);

}  // namespace symplane
