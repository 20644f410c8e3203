#include "symplane/error.hpp"
#include "symplane/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace symplane;

namespace {

Plane tilted(const Vec3& n, double degrees, const Vec3& axis_hint = Vec3::UnitZ()) {
  Vec3 axis = n.cross(axis_hint);
  if (axis.norm() < 1e-9) axis = n.unitOrthogonal();
  return {Eigen::AngleAxisd(degrees * std::numbers::pi / 180.0, axis.normalized()) * n, 0.0};
}

PlaneSet random_set(CounterRng& rng, std::size_t n) {
  std::vector<Plane> planes;
  for (std::size_t i = 0; i < n; ++i) planes.push_back(oracle::random_plane(rng, 1));
  return PlaneSet(planes);
}

PointCloud random_cloud(CounterRng& rng, std::size_t n, double scale) {
  PointCloud out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(oracle::random_point(rng, scale));
  return out;
}

// Camera at the origin looking down +z; a unit-depth pixel (u, v) lands at
// (u - cx, v - cy, 1).
struct FlatScene {
  CameraModel camera;
  DepthMap depth;
  FlatScene(std::size_t w, std::size_t h) : depth(w, h) {
    camera.cx = 0.5 * (double(w) - 1);
    camera.cy = 0.5 * (double(h) - 1);
    for (double& z : depth.depth.data()) z = 1.0;
  }
};

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::kIo;
}

}  // namespace

TEST(NormalAngle, Examples) {
  const Vec3 x(1, 0, 0);
  EXPECT_EQ(normal_angle(x, x), 0.0);
  EXPECT_EQ(normal_angle(x, -x), 0.0);
  EXPECT_NEAR(normal_angle(x, Vec3(std::sqrt(0.5), std::sqrt(0.5), 0)), 45.0, 1e-12);
  EXPECT_EQ(kind_of([&] { normal_angle(Vec3(2, 0, 0), x); }), ErrorKind::kInvalidInput);
}

TEST(PlaneSetTest, CanonicalizesAndRejectsDuplicates) {
  const PlaneSet s({{Vec3(-1, 0, 0), 1}, {Vec3(0, 1, 0), 0}});
  EXPECT_EQ(s[0].normal, Vec3(1, 0, 0));
  EXPECT_EQ(s[0].offset, -1);
  EXPECT_TRUE(s.contains({Vec3(-1, 0, 0), 1}));
  EXPECT_EQ(kind_of([] { PlaneSet({{Vec3(1, 0, 0), 1}, {Vec3(-1, 0, 0), -1}}); }), ErrorKind::kInvalidInput);
}

TEST(Exactness, Examples) {
  const PlaneSet gt({{Vec3(1, 0, 0), 0}, {Vec3(0, 1, 0), 0}});
  EXPECT_EQ(exactness(gt, gt), 0.0);
  const PlaneSet pred({tilted(Vec3(1, 0, 0), 10)});
  EXPECT_NEAR(exactness(pred, gt), 10.0, 1e-9);
  EXPECT_EQ(kind_of([&] { exactness(PlaneSet{}, gt); }), ErrorKind::kUndefinedMetric);
  EXPECT_EQ(kind_of([&] { exactness(gt, PlaneSet{}); }), ErrorKind::kInvalidInput);
}

TEST(Exactness, BruteForce) {
  CounterRng rng(60);
  for (int trial = 0; trial < 100; ++trial) {
    const PlaneSet pred = random_set(rng, 3), gt = random_set(rng, 2);
    double total = 0;
    for (const Plane& p : pred.planes()) {
      double best = 1e9;
      for (const Plane& g : gt.planes()) {
        best = std::min(best, std::acos(std::min(1.0, std::abs(p.normal.dot(g.normal)))) * 180 / std::numbers::pi);
      }
      total += best;
    }
    EXPECT_NEAR(exactness(pred, gt), total / 3, 1e-9);
    const double e = exactness(pred, gt);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 90.0);
  }
}

TEST(Completeness, Examples) {
  const PlaneSet gt({{Vec3(1, 0, 0), 0}, {Vec3(0, 1, 0), 0}});
  EXPECT_EQ(completeness(gt, gt), 0.0);
  const PlaneSet more({{Vec3(1, 0, 0), 0}, {Vec3(0, 1, 0), 0}, {Vec3(0, 0, 1), 0}});
  EXPECT_EQ(completeness(more, gt), 0.0);
  EXPECT_EQ(completeness(PlaneSet{}, gt), 90.0);
  EmptySetPolicy policy;
  policy.completeness_without_predictions = 45;
  EXPECT_EQ(completeness(PlaneSet{}, gt, policy), 45.0);
  EXPECT_EQ(kind_of([&] { completeness(gt, PlaneSet{}); }), ErrorKind::kUndefinedMetric);
}

TEST(Fscore, PerfectAgreement) {
  CounterRng rng(61);
  const PlaneSet s = random_set(rng, 4);
  for (double t : {0.1, 1.0, 5.0, 15.0}) EXPECT_EQ(fscore(s, s, s, t), 1.0);
}

TEST(Fscore, MatchedToNonVisible) {
  const Plane hidden{Vec3(1, 0, 0), 0};
  const Plane shown{Vec3(0, 1, 0), 0};
  const PlaneSet gt_all({hidden, shown});
  const PlaneSet gt_vis({shown});
  const PlaneSet pred({tilted(hidden.normal, 0.5)});
  const FscoreCounts c = fscore_counts(pred, gt_all, gt_vis, 1.0);
  EXPECT_EQ(c.tp, 0u);
  EXPECT_EQ(c.nv, 1u);
  EXPECT_EQ(c.fp, 0u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(fscore(pred, gt_all, gt_vis, 1.0), 0.0);
}

TEST(Fscore, OneWithinOneOutside) {
  const Plane a{Vec3(1, 0, 0), 0}, b{Vec3(0, 1, 0), 0};
  const PlaneSet gt({a, b});
  const PlaneSet pred({tilted(a.normal, 0.5), tilted(b.normal, 3.0, Vec3::UnitX())});
  const FscoreCounts c = fscore_counts(pred, gt, gt, 1.0);
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_EQ(c.nv, 0u);
  EXPECT_DOUBLE_EQ(fscore(pred, gt, gt, 1.0), 0.5);
}

TEST(Fscore, ThresholdIsStrict) {
  const Plane a{Vec3(1, 0, 0), 0};
  const PlaneSet gt({a});
  const PlaneSet pred({tilted(a.normal, 5.0)});
  const double angle = normal_angle(pred[0].normal, a.normal);
  EXPECT_EQ(fscore(pred, gt, gt, angle), 0.0);
  EXPECT_EQ(fscore(pred, gt, gt, std::nextafter(angle, 90.0)), 1.0);
}

TEST(Fscore, EmptyConventionsAndErrors) {
  const PlaneSet gt({{Vec3(1, 0, 0), 0}});
  EXPECT_EQ(fscore(PlaneSet{}, gt, PlaneSet{}, 5.0), 1.0);
  EmptySetPolicy policy;
  policy.fscore_when_empty = 0.0;
  EXPECT_EQ(fscore(PlaneSet{}, gt, PlaneSet{}, 5.0, policy), 0.0);
  EXPECT_EQ(fscore(PlaneSet{}, gt, gt, 5.0), 0.0);
  // Extra predictions with no visible truth are false positives.
  EXPECT_EQ(fscore(PlaneSet({{Vec3(0, 1, 0), 0}}), gt, PlaneSet{}, 5.0), 0.0);
  EXPECT_EQ(kind_of([&] { fscore(gt, gt, gt, 0.0); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { fscore(gt, gt, PlaneSet({{Vec3(0, 0, 1), 0}}), 1.0); }), ErrorKind::kInvalidInput);
}

TEST(Fscore, MonotoneInThreshold) {
  CounterRng rng(62);
  for (int trial = 0; trial < 200; ++trial) {
    const PlaneSet pred = random_set(rng, 1 + rng.below(5));
    const PlaneSet gt = random_set(rng, 1 + rng.below(5));
    std::vector<Plane> vis;
    for (const Plane& g : gt.planes())
      if (rng.uniform() < 0.6) vis.push_back(g);
    const PlaneSet gt_vis(vis);
    double prev = -1;
    for (double t : {0.5, 1.0, 5.0, 15.0, 30.0, 60.0, 91.0}) {
      const double f = fscore(pred, gt, gt_vis, t);
      EXPECT_GE(f, prev);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
      prev = f;
      const FscoreCounts c = fscore_counts(pred, gt, gt_vis, t);
      EXPECT_EQ(c.tp + c.fp + c.nv, pred.size());
      EXPECT_EQ(c.tp + c.fn, gt_vis.size());
    }
  }
}

TEST(DenseError, Identity) {
  CounterRng rng(63);
  const Plane p = oracle::random_plane(rng, 1);
  const PointCloud cloud = random_cloud(rng, 50, 3);
  EXPECT_EQ(dense_error(p, p, cloud), 0.0);
}

TEST(DenseError, ShiftIdentity) {
  CounterRng rng(64);
  for (int trial = 0; trial < 100; ++trial) {
    const Plane gt = oracle::random_plane(rng, 2);
    const double delta = rng.uniform(-1, 1);
    const PointCloud cloud = random_cloud(rng, 1 + rng.below(300), 4);
    double rho = 0;
    for (const Vec3& p : cloud) rho = std::max(rho, std::abs(gt.normal.dot(p) + gt.offset));
    const double got = dense_error({gt.normal, gt.offset + delta}, gt, cloud);
    EXPECT_NEAR(got, 2 * std::abs(delta) / rho, 1e-9);
  }
}

TEST(DenseError, DirectSummation) {
  CounterRng rng(65);
  for (int trial = 0; trial < 50; ++trial) {
    const Plane a = oracle::random_plane(rng, 1), b = oracle::random_plane(rng, 1);
    const PointCloud cloud = random_cloud(rng, 123, 2);
    double sum = 0, rho = 0;
    for (const Vec3& p : cloud) {
      sum += (oracle::mirror(a.normal, a.offset, p) - oracle::mirror(b.normal, b.offset, p)).norm();
      rho = std::max(rho, std::abs(b.normal.dot(p) + b.offset));
    }
    EXPECT_NEAR(dense_error(a, b, cloud), sum / 123 / rho, 1e-12 * (1 + sum / rho));
  }
}

TEST(DenseError, RigidAndScaleInvariant) {
  CounterRng rng(66);
  for (int trial = 0; trial < 100; ++trial) {
    const Plane a = oracle::random_plane(rng, 1), b = oracle::random_plane(rng, 1);
    const PointCloud cloud = random_cloud(rng, 80, 2);
    const double ref = dense_error(a, b, cloud);
    const Mat3 r = Eigen::AngleAxisd(rng.uniform(-3, 3), oracle::random_unit(rng)).toRotationMatrix();
    const Vec3 t = oracle::random_point(rng, 5);
    const double s = rng.uniform(0.1, 10);
    auto move = [&](const Plane& p) {
      const Vec3 n = r * p.normal;
      return Plane{n, s * p.offset - n.dot(t)};
    };
    PointCloud moved;
    for (const Vec3& p : cloud) moved.push_back(s * (r * p) + t);
    EXPECT_NEAR(dense_error(move(a), move(b), moved), ref, 1e-9 * (1 + ref));
  }
}

TEST(DenseError, Errors) {
  const Plane z{Vec3(0, 0, 1), 0};
  const PointCloud flat{Vec3(1, 0, 0), Vec3(0, 1, 0)};
  EXPECT_EQ(kind_of([&] { dense_error(z, z, flat); }), ErrorKind::kDegenerateConfiguration);
  EXPECT_EQ(kind_of([&] { dense_error(z, z, PointCloud{}); }), ErrorKind::kInvalidInput);
}

TEST(DenseErrorSet, IdentityAndSymmetry) {
  CounterRng rng(67);
  const PointCloud cloud = random_cloud(rng, 100, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const PlaneSet a = random_set(rng, 3), b = random_set(rng, 2);
    EXPECT_NEAR(dense_error_set(a, a, a, cloud), 0.0, 1e-15);
    // Swapping roles with gt_visible = gt_all only swaps the two halves when
    // the normaliser is the same; use a common one by checking the brute
    // force instead.
    double ex = 0, co = 0;
    for (const Plane& p : a.planes()) {
      double best = 1e300;
      for (const Plane& g : b.planes()) best = std::min(best, dense_error(p, g, cloud));
      ex += best;
    }
    for (const Plane& g : b.planes()) {
      double best = 1e300;
      for (const Plane& p : a.planes()) best = std::min(best, dense_error(p, g, cloud));
      co += best;
    }
    EXPECT_NEAR(dense_error_set(a, b, b, cloud), 0.5 * (ex / 3 + co / 2), 1e-12);
  }
}

TEST(DenseErrorSet, SwapSymmetricUnderEqualNormalisers) {
  // Planes through the origin and a cloud symmetric under all of them share
  // the same rho, so swapping prediction and truth leaves the value intact.
  PointCloud cloud;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j)
      for (int k = -2; k <= 2; ++k) cloud.emplace_back(i, j, k);
  const PlaneSet a({{Vec3(1, 0, 0), 0}, {Vec3(0, 1, 0), 0}});
  const PlaneSet b({{Vec3(0, 0, 1), 0}});
  EXPECT_NEAR(dense_error_set(a, b, b, cloud), dense_error_set(b, a, a, cloud), 1e-12);
}

TEST(CentralCrop, Margins) {
  const CropWindow c = central_crop(50, 40, 0.8);
  EXPECT_EQ(c.u0, 5u);
  EXPECT_EQ(c.u1, 45u);
  EXPECT_EQ(c.v0, 4u);
  EXPECT_EQ(c.v1, 36u);
  const CropWindow odd = central_crop(13, 7, 0.8);
  EXPECT_EQ(odd.u0, 1u);
  EXPECT_EQ(odd.u1, 12u);
  EXPECT_EQ(odd.v0, 0u);
  EXPECT_EQ(odd.v1, 7u);
}

TEST(Visibility, EvenSplit) {
  FlatScene s(50, 40);
  EXPECT_TRUE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 0}));
}

TEST(Visibility, AllOnOneSide) {
  FlatScene s(50, 40);
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 30}));
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(0, 0, 1), -0.5}));
}

TEST(Visibility, OnlyCentralCropCounts) {
  FlatScene s(50, 40);
  // Inside the crop x ranges over [-19.5, 19.5]; the plane x = -20 only cuts
  // the border columns.
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 20}));
  // Depth only outside the crop: nothing valid.
  FlatScene ring(50, 40);
  const CropWindow c = central_crop(50, 40, 0.8);
  for (std::size_t v = c.v0; v < c.v1; ++v)
    for (std::size_t u = c.u0; u < c.u1; ++u) ring.depth.depth(u, v) = std::nan("");
  EXPECT_FALSE(visibility_filter(ring.depth, ring.camera, {Vec3(1, 0, 0), 0}));
}

TEST(Visibility, ValidPixelFloor) {
  FlatScene s(50, 40);  // 1280 crop pixels
  std::size_t dropped = 0;
  const CropWindow c = central_crop(50, 40, 0.8);
  for (std::size_t v = c.v0; v < c.v1 && dropped < 280; ++v)
    for (std::size_t u = c.u0; u < c.u1 && dropped < 280; ++u, ++dropped) s.depth.depth(u, v) = std::nan("");
  EXPECT_TRUE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 0}));
  // One more invalid pixel leaves 999.
  s.depth.depth(c.u1 - 1, c.v1 - 1) = std::nan("");
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 0}));
}

TEST(Visibility, SideProportionBoundary) {
  FlatScene s(50, 40);
  // Crop columns sit at x = -19.5 ... 19.5, 32 pixels each out of 1280.
  // Two columns negative: exactly 5%, visible.
  EXPECT_TRUE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 18}));
  // One column: 2.5%, not visible.
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 19}));
  // Points exactly on the plane are on neither side: the column x = -18.5
  // lies on the plane, leaving one negative column.
  EXPECT_FALSE(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), 18.5}));
}

TEST(Visibility, MirroredSceneGivesSameAnswer) {
  // Counting is unaffected by mirroring the image and the plane together.
  FlatScene s(50, 40);
  CounterRng rng(68);
  for (double& z : s.depth.depth.data()) z = rng.uniform() < 0.1 ? std::nan("") : rng.uniform(0.5, 2);
  DepthMap flipped(50, 40);
  for (std::size_t v = 0; v < 40; ++v)
    for (std::size_t u = 0; u < 50; ++u) flipped.depth(u, v) = s.depth.depth(49 - u, v);
  for (double d : {-3.0, -1.0, 0.0, 2.0, 5.0}) {
    EXPECT_EQ(visibility_filter(s.depth, s.camera, {Vec3(1, 0, 0), d}),
              visibility_filter(flipped, s.camera, {Vec3(-1, 0, 0), d}));
  }
}

TEST(MatchingCost, Examples) {
  SignedDistanceMap pred(1, 1), gt(1, 1);
  pred.valid(0, 0) = gt.valid(0, 0) = 1;
  pred.confidence = Grid<double>(1, 1, 1.0);
  pred.sdf(0, 0) = 2.5;
  gt.sdf(0, 0) = 0.5;
  EXPECT_DOUBLE_EQ(matching_cost(pred, gt, 0.2), 2.0);
  pred.sdf(0, 0) = gt.sdf(0, 0);
  (*pred.confidence)(0, 0) = std::exp(1.0);
  EXPECT_NEAR(matching_cost(pred, gt, 0.2), -0.2, 1e-15);
}

TEST(MatchingCost, PerfectUnitConfidenceIsZero) {
  CounterRng rng(69);
  SignedDistanceMap pred(8, 6), gt(8, 6);
  pred.confidence = Grid<double>(8, 6, 1.0);
  for (std::size_t i = 0; i < pred.sdf.size(); ++i) {
    pred.sdf.data()[i] = gt.sdf.data()[i] = rng.uniform(-1, 1);
    pred.valid.data()[i] = gt.valid.data()[i] = 1;
  }
  EXPECT_EQ(matching_cost(pred, gt, 0.7), 0.0);
}

TEST(MatchingCost, OnlyJointlyValidPixels) {
  SignedDistanceMap pred(2, 1), gt(2, 1);
  pred.confidence = Grid<double>(2, 1, 2.0);
  pred.sdf(0, 0) = 1;
  pred.sdf(1, 0) = 100;
  pred.valid(0, 0) = pred.valid(1, 0) = 1;
  gt.valid(0, 0) = 1;
  EXPECT_NEAR(matching_cost(pred, gt, 0.5), 2.0 - 0.5 * std::log(2.0), 1e-15);
}

TEST(MatchingCost, Errors) {
  SignedDistanceMap pred(2, 2), gt(2, 2);
  EXPECT_EQ(kind_of([&] { matching_cost(pred, gt, 0.1); }), ErrorKind::kInvalidInput);
  pred.confidence = Grid<double>(2, 2, 0.0);
  pred.valid(0, 0) = gt.valid(0, 0) = 1;
  EXPECT_EQ(kind_of([&] { matching_cost(pred, gt, 0.1); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(kind_of([&] { matching_cost(pred, SignedDistanceMap(3, 2), 0.1); }), ErrorKind::kInvalidInput);
}

TEST(MatchingCosts, FeedsAssignment) {
  std::vector<SignedDistanceMap> preds(2, SignedDistanceMap(1, 1)), gts(2, SignedDistanceMap(1, 1));
  for (int i = 0; i < 2; ++i) {
    preds[i].valid(0, 0) = gts[i].valid(0, 0) = 1;
    preds[i].confidence = Grid<double>(1, 1, 1.0);
    gts[i].sdf(0, 0) = i;
    preds[i].sdf(0, 0) = 1 - i;
  }
  const CostMatrix c = matching_costs(preds, gts, 0.3);
  const Assignment a = assign(c);
  EXPECT_EQ(a.pairs[0].col, 1u);
  EXPECT_EQ(mean_matched_loss(c, a), 0.0);
}

TEST(Median, OddEvenEmpty) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 3, 2}), 2.5);
  EXPECT_THROW(median({}), Error);
}
