#include "symplane/error.hpp"
#include "symplane/pipeline.hpp"
#include "symplane/random.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace symplane;

namespace {

GroundTruthScene small_scene(ShapeKind shape, int k, std::uint64_t seed = 5) {
  SceneSpec s;
  s.shape = shape;
  s.symmetry_count = k;
  s.point_count = 3000;
  s.camera_count = 2;
  s.width = 64;
  s.height = 48;
  s.seed = seed;
  return generate_scene(s);
}

PipelineConfig loose_config() {
  PipelineConfig c;
  c.cluster.min_points = 1;
  return c;
}

// Keeps the points on the non-negative side of every plane.
PointCloud restrict_to(const PointCloud& cloud, const std::vector<Plane>& planes) {
  PointCloud out;
  for (const Vec3& p : cloud) {
    bool keep = true;
    for (const Plane& q : planes) keep = keep && signed_distance(q, p) >= 0;
    if (keep) out.push_back(p);
  }
  return out;
}

}  // namespace

TEST(Unflip, Involution) {
  for (std::size_t w : {1u, 2u, 7u, 640u}) {
    for (long u = 0; u < long(w); ++u) EXPECT_EQ(unflip(unflip(u, w), w), u);
    EXPECT_EQ(unflip(0, w), long(w) - 1);
  }
  EXPECT_THROW(unflip(-1, 10), Error);
  try {
    unflip(10, 10);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOutOfBounds);
  }
}

TEST(Annotate, RecoversSceneFromBundle) {
  const GroundTruthScene scene = small_scene(ShapeKind::kBoxFacade, 4);
  SceneBundle bundle = bundle_from_scene(scene, {200, 0.0, 1});
  const AnnotationResult r = annotate_scene(bundle, loose_config());
  EXPECT_TRUE(r.log.empty());
  ASSERT_EQ(r.clusters.size(), 4u);
  ASSERT_EQ(bundle.annotated.size(), 4u);
  for (const Plane& gt : scene.planes) {
    double best = 1e9;
    for (const PlaneRecord& a : bundle.annotated)
      best = std::min(best, plane_distance(a.plane, gt, std::numbers::pi / 180, 1e-3 * scene.diameter));
    EXPECT_LT(best, 1e-3);
  }
}

TEST(Annotate, DeterministicAcrossThreads) {
  const GroundTruthScene scene = small_scene(ShapeKind::kCrossPlan, 2);
  SceneBundle a = bundle_from_scene(scene, {150, 0.2, 3});
  SceneBundle b = a;
  PipelineConfig one = loose_config();
  PipelineConfig four = loose_config();
  four.threads = 4;
  annotate_scene(a, one);
  annotate_scene(b, four);
  EXPECT_EQ(planes_to_json(a.annotated), planes_to_json(b.annotated));
}

TEST(Annotate, RecordsWithoutDepth) {
  const GroundTruthScene scene = small_scene(ShapeKind::kBoxFacade, 1);
  SceneBundle bundle = bundle_from_scene(scene, {100, 0.0, 1});
  for (BundleImage& img : bundle.images) img.depth = DepthMap(img.depth.width(), img.depth.height());
  try {
    annotate_scene(bundle, loose_config());
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInsufficientData);
  }
  bundle.records.clear();
  EXPECT_THROW(annotate_scene(bundle, loose_config()), Error);
}

TEST(Annotate, SingleNoiselessRecord) {
  const GroundTruthScene scene = small_scene(ShapeKind::kOctagonTower, 8);
  const PointPairSet pairs = sample_correspondences(scene, 5, 100, 0, 0, 2);
  const AnnotationResult r = annotate_pairs({pairs}, scene.diameter, loose_config());
  ASSERT_EQ(r.clusters.size(), 1u);
  EXPECT_LT(normal_angle(r.clusters[0].center.normal, scene.planes[5].normal), 1e-9);
  EXPECT_NEAR(r.clusters[0].center.offset, scene.planes[5].offset, 1e-9);
}

TEST(Annotate, FailedRecordsAreLogged) {
  const GroundTruthScene scene = small_scene(ShapeKind::kBoxFacade, 2);
  PointPairSet tiny;
  tiny.add(Vec3(0, 0, 0), Vec3(1, 0, 0));
  const PointPairSet good = sample_correspondences(scene, 0, 100, 0, 0, 2);
  const AnnotationResult r = annotate_pairs({tiny, good}, scene.diameter, loose_config());
  ASSERT_EQ(r.log.size(), 1u);
  EXPECT_NE(r.log[0].find("record 0"), std::string::npos);
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.candidates[0].source_id, "record-1");
}

TEST(RecordPairs, MatchesUnflipAndDropMissingDepth) {
  const GroundTruthScene scene = small_scene(ShapeKind::kBoxFacade, 1);
  SceneBundle bundle = bundle_from_scene(scene, {50, 0.0, 1});
  const CorrespondenceRecord& rec = bundle.records.front();
  const PointPairSet pairs = record_pairs(bundle, rec);
  EXPECT_EQ(pairs.size(), rec.matches.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_LT((reflect_point(scene.planes[0], pairs.second[k]) - pairs.first[k]).norm(), 1e-9 * scene.diameter);
  }
  CorrespondenceRecord bad = rec;
  bad.matches.push_back({0, 0, 0, 0});
  EXPECT_EQ(record_pairs(bundle, bad).size(), pairs.size());
  bad.matches.push_back({0, 0, 1000, 0});
  EXPECT_THROW(record_pairs(bundle, bad), Error);
}

namespace {

struct Prediction {
  PointMap map;
  std::vector<SignedDistanceMap> sdfs;
  std::vector<double> logits;
};

Prediction synthetic_prediction(const std::vector<Plane>& planes, CounterRng& rng) {
  Prediction p;
  p.map = PointMap(40, 30);
  for (std::size_t i = 0; i < p.map.points.size(); ++i) {
    p.map.points.data()[i] = oracle::random_point(rng, 5);
    p.map.valid.data()[i] = 1;
  }
  for (const Plane& plane : planes) {
    SignedDistanceMap m = signed_distance_map(p.map, plane);
    m.confidence = Grid<double>(40, 30, 1.0);
    p.sdfs.push_back(m);
    p.logits.push_back(1.0);
  }
  return p;
}

}  // namespace

TEST(PlanesFromPrediction, ExactMapsGiveExactPlanes) {
  CounterRng rng(11);
  const std::vector<Plane> planes = {canonicalize(oracle::random_plane(rng, 2)),
                                     canonicalize(oracle::random_plane(rng, 2))};
  const Prediction p = synthetic_prediction(planes, rng);
  const SdfPlanes out = planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 0.5);
  ASSERT_EQ(out.fits.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_LT((out.fits[k].plane.normal - planes[k].normal).norm(), 1e-10);
    EXPECT_NEAR(out.fits[k].plane.offset, planes[k].offset, 1e-10);
  }
}

TEST(PlanesFromPrediction, LogitThreshold) {
  CounterRng rng(12);
  Prediction p = synthetic_prediction({canonicalize(oracle::random_plane(rng, 2)), canonicalize(oracle::random_plane(rng, 2))}, rng);
  p.logits = {-1.0, 0.5};
  const SdfPlanes some = planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 0.5);
  ASSERT_EQ(some.instances, (std::vector<std::size_t>{1}));
  const SdfPlanes none = planes_from_prediction(p.map, p.sdfs, p.logits, 2.0, 0.5);
  EXPECT_TRUE(none.fits.empty());
  EXPECT_THROW(planes_from_prediction(p.map, p.sdfs, {1.0}, 0.0, 0.5), Error);
  EXPECT_THROW(planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 1.5), Error);
}

TEST(PlanesFromPrediction, QuantileDropsLowConfidenceCorruption) {
  CounterRng rng(13);
  const Plane plane = canonicalize(oracle::random_plane(rng, 2));
  Prediction p = synthetic_prediction({plane}, rng);
  SignedDistanceMap& m = p.sdfs[0];
  // 20% of pixels carry garbage with low confidence.
  for (std::size_t i = 0; i < m.sdf.size(); ++i) {
    if (i % 5 != 0) continue;
    m.sdf.data()[i] += rng.uniform(-3, 3);
    m.confidence->data()[i] = 0.1;
  }
  const SdfPlanes kept = planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 0.5);
  ASSERT_EQ(kept.fits.size(), 1u);
  EXPECT_LT((kept.fits[0].plane.normal - plane.normal).norm(), 1e-10);
  EXPECT_NEAR(kept.fits[0].plane.offset, plane.offset, 1e-10);
  // With q = 0 every pixel takes part and the garbage shows.
  const SdfPlanes all = planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 0.0);
  ASSERT_EQ(all.fits.size(), 1u);
  EXPECT_GT((all.fits[0].plane.normal - plane.normal).norm() + std::abs(all.fits[0].plane.offset - plane.offset), 1e-4);
}

TEST(PlanesFromPrediction, TooFewPixelsWarns) {
  CounterRng rng(14);
  Prediction p = synthetic_prediction({canonicalize(oracle::random_plane(rng, 2))}, rng);
  for (std::size_t i = 3; i < p.map.valid.size(); ++i) p.map.valid.data()[i] = 0;
  const SdfPlanes out = planes_from_prediction(p.map, p.sdfs, p.logits, 0.0, 0.0);
  EXPECT_TRUE(out.fits.empty());
  EXPECT_EQ(out.warnings.size(), 1u);
}

TEST(Complete, HalfBoxRestoresTheBox) {
  const GroundTruthScene scene = small_scene(ShapeKind::kBoxFacade, 1);
  const PointCloud half = restrict_to(scene.clean_cloud, scene.planes);
  const PointCloud full = complete_cloud(half, scene.planes, 2);
  EXPECT_LT(oracle::hausdorff(full, scene.clean_cloud), 1e-6 * scene.diameter);
}

TEST(Complete, QuarterOctagonNeedsDepthTwo) {
  const GroundTruthScene scene = small_scene(ShapeKind::kOctagonTower, 8);
  // A 45 degree wedge: one eighth of the tower.
  PointCloud piece;
  for (const Vec3& p : scene.clean_cloud) {
    const double a = std::atan2(p.y(), p.x());
    if (a >= 0 && a <= std::numbers::pi / 4) piece.push_back(p);
  }
  ASSERT_GT(piece.size(), 50u);
  const PointCloud full = complete_cloud(piece, scene.planes, 2);
  EXPECT_LT(oracle::hausdorff(full, scene.clean_cloud), 1e-6 * scene.diameter);
}

TEST(Complete, SupersetAndValidation) {
  CounterRng rng(15);
  PointCloud pts;
  for (int i = 0; i < 40; ++i) pts.push_back(oracle::random_point(rng, 3));
  const std::vector<Plane> planes = {canonicalize({Vec3(1, 0, 0), 0.3}), canonicalize({Vec3(0, 1, 1), 0})};
  const PointCloud out = complete_cloud(pts, planes, 3);
  ASSERT_GE(out.size(), pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(out[i], pts[i]);
  // Closed under each plane to the merge tolerance, up to depth.
  const PointCloud once = complete_cloud(pts, {planes[0]}, 1);
  EXPECT_EQ(once.size(), 2 * pts.size());
  EXPECT_THROW(complete_cloud(pts, {}, 2), Error);
  EXPECT_THROW(complete_cloud(pts, planes, 0), Error);
  // An idempotent plane doubles nothing twice.
  EXPECT_EQ(complete_cloud(pts, {planes[0]}, 5).size(), once.size());
}

namespace {

SceneBundle eval_bundle(const GroundTruthScene& scene) {
  SceneBundle b = bundle_from_scene(scene, {20, 0.0, 1});
  std::vector<PlaneRecord> gt;
  for (const Plane& p : scene.planes) gt.push_back({p, 1});
  b.ground_truth = gt;
  return b;
}

GroundTruthScene eval_scene() {
  SceneSpec s;
  s.shape = ShapeKind::kCrossPlan;
  s.symmetry_count = 4;
  s.point_count = 1000;
  s.camera_count = 3;
  s.width = 128;
  s.height = 96;
  s.seed = 21;
  return generate_scene(s);
}

}  // namespace

TEST(EvaluateScene, PerfectPredictions) {
  const GroundTruthScene scene = eval_scene();
  const SceneBundle bundle = eval_bundle(scene);
  const SceneEvaluation ev = evaluate_scene(bundle, PipelineConfig{}, &scene.planes);
  ASSERT_GT(ev.evaluated_images, 0u);
  EXPECT_LT(ev.median_geodesic, 1e-6);
  EXPECT_LT(ev.median_dense_error, 1e-9);
  for (const auto& [t, f] : ev.mean_fscore) EXPECT_DOUBLE_EQ(f, 1.0) << t;
}

TEST(EvaluateScene, RotatedPredictions) {
  const GroundTruthScene scene = eval_scene();
  const SceneBundle bundle = eval_bundle(scene);
  const Mat3 tilt = Eigen::AngleAxisd(3.0 * std::numbers::pi / 180, Vec3::UnitZ()).toRotationMatrix();
  std::vector<Plane> rotated;
  for (const Plane& p : scene.planes) rotated.push_back(canonicalize({tilt * p.normal, p.offset}));
  const SceneEvaluation ev = evaluate_scene(bundle, PipelineConfig{}, &rotated);
  ASSERT_GT(ev.evaluated_images, 0u);
  EXPECT_NEAR(ev.median_geodesic, 3.0, 1e-6);
  EXPECT_DOUBLE_EQ(ev.mean_fscore.at(1.0), 0.0);
  EXPECT_DOUBLE_EQ(ev.mean_fscore.at(5.0), 1.0);
  EXPECT_GT(ev.median_dense_error, 0.0);
}

TEST(EvaluateScene, MedianIgnoresOneBadImage) {
  const GroundTruthScene scene = eval_scene();
  SceneBundle bundle = eval_bundle(scene);
  for (const BundleImage& img : bundle.images) bundle.predictions[img.id] = scene.planes;
  bundle.predictions[bundle.images[0].id] = {canonicalize({Vec3(0, 0, 1), -1})};
  const SceneEvaluation ev = evaluate_scene(bundle, PipelineConfig{});
  ASSERT_GE(ev.evaluated_images, 3u);
  EXPECT_LT(ev.median_geodesic, 1e-6);
  const std::string text = evaluation_to_json(ev);
  EXPECT_NE(text.find("\"median_geodesic\""), std::string::npos);
}

TEST(EvaluateScene, EmptyPredictionsAndMissingTruth) {
  const GroundTruthScene scene = eval_scene();
  SceneBundle bundle = eval_bundle(scene);
  const std::vector<Plane> none;
  const SceneEvaluation ev = evaluate_scene(bundle, PipelineConfig{}, &none);
  ASSERT_GT(ev.evaluated_images, 0u);
  EXPECT_DOUBLE_EQ(ev.median_geodesic, 90.0);
  EXPECT_TRUE(std::isnan(ev.median_dense_error));
  EXPECT_NE(evaluation_to_json(ev).find("null"), std::string::npos);
  bundle.ground_truth.reset();
  try {
    evaluate_scene(bundle, PipelineConfig{}, &none);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidBundle);
  }
}
