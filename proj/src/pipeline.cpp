#include "symplane/pipeline.hpp"

#include "symplane/error.hpp"
#include "symplane/parallel.hpp"
#include "symplane/random.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

namespace symplane {
namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Affine {
  Mat3 linear = Mat3::Identity();
  Vec3 shift = Vec3::Zero();
};

bool same_affine(const Affine& a, const Affine& b) {
  return (a.linear - b.linear).cwiseAbs().maxCoeff() < 1e-12 &&
         (a.shift - b.shift).cwiseAbs().maxCoeff() < 1e-12 * (1.0 + a.shift.norm());
}

// Grid hash for merging points closer than a tolerance.
class PointMerger {
 public:
  explicit PointMerger(double tol) : tol_(tol) {}

  bool insert(const Vec3& p) {
    const Key k = key(p);
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(Key{k.x + dx, k.y + dy, k.z + dz});
          if (it == cells_.end()) continue;
          for (const Vec3& q : it->second)
            if ((p - q).norm() <= tol_) return false;
        }
    cells_[k].push_back(p);
    return true;
  }

 private:
  struct Key {
    long long x, y, z;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = std::uint64_t(k.x) * 0x9E3779B97F4A7C15ULL;
      h ^= std::uint64_t(k.y) + 0xBF58476D1CE4E5B9ULL + (h << 6) + (h >> 2);
      h ^= std::uint64_t(k.z) + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
      return std::size_t(h);
    }
  };
  Key key(const Vec3& p) const {
    return {static_cast<long long>(std::floor(p.x() / tol_)),
            static_cast<long long>(std::floor(p.y() / tol_)),
            static_cast<long long>(std::floor(p.z() / tol_))};
  }

  double tol_;
  std::unordered_map<Key, std::vector<Vec3>, KeyHash> cells_;
};

double finite_median(const std::vector<double>& values) {
  std::vector<double> kept;
  for (double v : values)
    if (std::isfinite(v)) kept.push_back(v);
  return kept.empty() ? kNaN : median(std::move(kept));
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

long unflip(long u_flipped, std::size_t width) {
  if (u_flipped < 0 || std::size_t(u_flipped) >= width) {
    throw Error(ErrorKind::kOutOfBounds, "flipped column " + std::to_string(u_flipped) +
                                             " outside an image of width " + std::to_string(width));
  }
  return long(width) - 1 - u_flipped;
}

PointPairSet record_pairs(const SceneBundle& bundle, const CorrespondenceRecord& record) {
  const BundleImage& a = bundle.image(record.image_a);
  const BundleImage& b = bundle.image(record.image_b);
  PointPairSet pairs;
  for (const auto& m : record.matches) {
    const long ub = record.flipped_b ? unflip(m[2], b.depth.width()) : m[2];
    if (m[0] < 0 || m[1] < 0 || m[3] < 0 ||
        !a.depth.depth.contains(m[0], m[1]) || !b.depth.depth.contains(ub, m[3])) {
      throw Error(ErrorKind::kOutOfBounds, "match outside its images");
    }
    if (!a.depth.is_valid(m[0], m[1]) || !b.depth.is_valid(ub, m[3])) continue;
    pairs.add(unproject(a.depth, a.camera, m[0], m[1]),
              unproject(b.depth, b.camera, ub, m[3]));
  }
  return pairs;
}

AnnotationResult annotate_pairs(const std::vector<PointPairSet>& records, double diameter,
                                const PipelineConfig& config) {
  config.validate();
  std::vector<std::optional<FitReport>> fits(records.size());
  std::vector<std::string> failures(records.size());
  parallel_for(records.size(), config.threads, [&](std::size_t i) {
    ReflectionFitOptions options = config.fit;
    options.ransac.seed = CounterRng(config.seed, i).next_u64();
    try {
      fits[i] = fit_reflection_plane(records[i], options);
    } catch (const Error& e) {
      failures[i] = "record " + std::to_string(i) + " skipped (" + to_string(e.kind()) + "): " + e.what();
    }
  });

  AnnotationResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!fits[i]) {
      result.log.push_back(failures[i]);
      continue;
    }
    result.candidates.push_back(
        {fits[i]->plane, double(fits[i]->inlier_count), "record-" + std::to_string(i)});
  }
  if (result.candidates.empty()) {
    throw Error(ErrorKind::kInsufficientData, "no correspondence record produced a plane");
  }
  result.clusters = cluster_planes(result.candidates, config.cluster_for(diameter));
  return result;
}

AnnotationResult annotate_scene(SceneBundle& bundle, const PipelineConfig& config) {
  bundle.validate();
  if (bundle.records.empty()) {
    throw Error(ErrorKind::kInsufficientData, "bundle has no correspondence records");
  }
  std::vector<PointPairSet> pairs(bundle.records.size());
  parallel_for(bundle.records.size(), config.threads,
               [&](std::size_t i) { pairs[i] = record_pairs(bundle, bundle.records[i]); });
  AnnotationResult result = annotate_pairs(pairs, bundle.scene_diameter(), config);
  bundle.annotated.clear();
  for (const PlaneCluster& c : result.clusters) bundle.annotated.push_back({c.center, c.support});
  return result;
}

SdfPlanes planes_from_prediction(const PointMap& point_map,
                                 const std::vector<SignedDistanceMap>& sdf_maps,
                                 const std::vector<double>& logits, double logit_threshold,
                                 double confidence_quantile, bool confidence_weighting) {
  if (sdf_maps.size() != logits.size()) {
    throw Error(ErrorKind::kInvalidInput, "one logit per signed distance map is required");
  }
  if (!(confidence_quantile >= 0.0 && confidence_quantile <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "confidence quantile must lie in [0, 1]");
  }
  for (const SignedDistanceMap& m : sdf_maps) {
    if (m.width() != point_map.width() || m.height() != point_map.height() ||
        (m.confidence && (m.confidence->width() != m.width() || m.confidence->height() != m.height()))) {
      throw Error(ErrorKind::kInvalidInput, "prediction maps differ in size from the point map");
    }
  }

  SdfPlanes out;
  for (std::size_t k = 0; k < sdf_maps.size(); ++k) {
    if (!(logits[k] >= logit_threshold)) continue;
    const SignedDistanceMap& m = sdf_maps[k];
    std::vector<std::size_t> pixels;
    std::vector<double> conf;
    for (std::size_t i = 0; i < m.sdf.size(); ++i) {
      if (!point_map.valid.data()[i] || !m.valid.data()[i]) continue;
      const double c = m.confidence ? m.confidence->data()[i] : 1.0;
      if (!std::isfinite(c) || !std::isfinite(m.sdf.data()[i])) continue;
      pixels.push_back(i);
      conf.push_back(c);
    }
    double threshold = -std::numeric_limits<double>::infinity();
    if (!conf.empty()) {
      std::vector<double> sorted = conf;
      const std::size_t at = std::size_t(std::floor(confidence_quantile * double(sorted.size() - 1)));
      std::nth_element(sorted.begin(), sorted.begin() + long(at), sorted.end());
      threshold = sorted[at];
    }
    SdfSampleSet samples;
    for (std::size_t j = 0; j < pixels.size(); ++j) {
      if (conf[j] < threshold) continue;
      const double w = confidence_weighting ? conf[j] : 1.0;
      samples.add(point_map.points.data()[pixels[j]], m.sdf.data()[pixels[j]], w);
    }
    if (samples.size() < 4) {
      out.warnings.push_back("instance " + std::to_string(k) + " skipped: " +
                             std::to_string(samples.size()) + " pixels selected");
      continue;
    }
    try {
      out.fits.push_back(fit_plane_from_sdf(samples));
      out.instances.push_back(k);
    } catch (const Error& e) {
      out.warnings.push_back("instance " + std::to_string(k) + " skipped: " + e.what());
    }
  }
  return out;
}

PointCloud complete_cloud(std::span<const Vec3> points, const std::vector<Plane>& planes,
                          int closure_depth) {
  if (planes.empty()) throw Error(ErrorKind::kInvalidInput, "completion needs at least one plane");
  if (closure_depth < 1) throw Error(ErrorKind::kInvalidInput, "closure depth must be at least 1");
  for (const Plane& p : planes) validate_plane(p);

  std::vector<Affine> maps{Affine{}};
  std::vector<Affine> frontier = maps;
  for (int depth = 0; depth < closure_depth && !frontier.empty(); ++depth) {
    std::vector<Affine> next;
    for (const Affine& f : frontier) {
      for (const Plane& plane : planes) {
        const Plane unit{plane.normal.normalized(), plane.offset / plane.normal.norm()};
        const Mat3 h = reflection_linear(unit);
        const Affine g{h * f.linear, h * f.shift - 2.0 * unit.offset * unit.normal};
        const bool known = std::any_of(maps.begin(), maps.end(),
                                       [&](const Affine& m) { return same_affine(m, g); });
        if (!known) {
          maps.push_back(g);
          next.push_back(g);
        }
      }
    }
    frontier = std::move(next);
  }

  PointMerger merger(1e-9);
  PointCloud out;
  for (const Affine& g : maps) {
    for (const Vec3& p : points) {
      const Vec3 q = g.linear * p + g.shift;
      if (merger.insert(q)) out.push_back(q);
    }
  }
  return out;
}

PointCloud complete_cloud(const PointMap& point_map, const std::vector<Plane>& planes,
                          int closure_depth) {
  PointCloud valid;
  for (std::size_t i = 0; i < point_map.points.size(); ++i)
    if (point_map.valid.data()[i]) valid.push_back(point_map.points.data()[i]);
  return complete_cloud(valid, planes, closure_depth);
}

SceneEvaluation evaluate_scene(const SceneBundle& bundle, const PipelineConfig& config,
                               const std::vector<Plane>* shared_predictions) {
  config.validate();
  if (!bundle.ground_truth || bundle.ground_truth->empty()) {
    throw Error(ErrorKind::kInvalidBundle, "bundle has no ground-truth planes");
  }
  std::vector<Plane> gt_planes;
  for (const PlaneRecord& r : *bundle.ground_truth) gt_planes.push_back(r.plane);
  const PlaneSet gt_all(gt_planes);
  const EmptySetPolicy policy;

  SceneEvaluation out;
  out.images.resize(bundle.images.size());
  parallel_for(bundle.images.size(), config.threads, [&](std::size_t i) {
    const BundleImage& img = bundle.images[i];
    ImageEvaluation& ev = out.images[i];
    ev.id = img.id;

    std::vector<Plane> preds;
    if (shared_predictions) {
      preds = *shared_predictions;
    } else if (auto it = bundle.predictions.find(img.id); it != bundle.predictions.end()) {
      preds = it->second;
    }
    const PlaneSet pred(preds);
    ev.predicted = pred.size();

    std::vector<Plane> visible;
    for (const Plane& p : gt_all.planes())
      if (visibility_filter(img.depth, img.camera, p, config.visibility)) visible.push_back(p);
    const PlaneSet gt_visible(visible);
    ev.visible = gt_visible.size();
    if (gt_visible.empty()) {
      ev.note = "no visible ground-truth plane";
      return;
    }

    EvalReport& r = ev.report;
    r.completeness = completeness(pred, gt_visible, policy);
    r.exactness = pred.empty() ? 90.0 : exactness(pred, gt_all);
    r.geodesic = 0.5 * (r.exactness + r.completeness);
    for (double t : config.fscore_thresholds) r.fscore_at[t] = fscore(pred, gt_all, gt_visible, t, policy);

    r.dense_error = kNaN;
    if (!pred.empty()) {
      const PointMap map = unproject_depth_map(img.depth, img.camera);
      PointCloud cloud;
      for (std::size_t k = 0; k < map.points.size(); ++k)
        if (map.valid.data()[k]) cloud.push_back(map.points.data()[k]);
      try {
        if (!cloud.empty()) r.dense_error = dense_error_set(pred, gt_all, gt_visible, cloud);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerateConfiguration) throw;
        ev.note = e.what();
      }
    } else {
      ev.note = "empty prediction";
    }
    ev.evaluated = true;
  });

  std::vector<double> geo, dense;
  for (const ImageEvaluation& ev : out.images) {
    if (!ev.evaluated) continue;
    ++out.evaluated_images;
    geo.push_back(ev.report.geodesic);
    dense.push_back(ev.report.dense_error);
    for (const auto& [t, f] : ev.report.fscore_at) out.mean_fscore[t] += f;
  }
  out.median_geodesic = finite_median(geo);
  out.median_dense_error = finite_median(dense);
  for (auto& [t, f] : out.mean_fscore) f /= double(out.evaluated_images);
  return out;
}

std::string evaluation_to_json(const SceneEvaluation& evaluation) {
  auto fscores = [](const std::map<double, double>& m) {
    json j = json::object();
    for (const auto& [t, f] : m) {
      json key = t;
      j[key.dump()] = number_or_null(f);
    }
    return j;
  };
  json images = json::array();
  for (const ImageEvaluation& ev : evaluation.images) {
    json j = {{"id", ev.id}, {"evaluated", ev.evaluated}, {"predicted", ev.predicted},
              {"visible", ev.visible}};
    if (!ev.note.empty()) j["note"] = ev.note;
    if (ev.evaluated) {
      j["geodesic"] = number_or_null(ev.report.geodesic);
      j["exactness"] = number_or_null(ev.report.exactness);
      j["completeness"] = number_or_null(ev.report.completeness);
      j["fscore"] = fscores(ev.report.fscore_at);
      j["dense_error"] = number_or_null(ev.report.dense_error);
    }
    images.push_back(j);
  }
  const json doc = {{"scene",
                     {{"evaluated_images", evaluation.evaluated_images},
                      {"median_geodesic", number_or_null(evaluation.median_geodesic)},
                      {"median_dense_error", number_or_null(evaluation.median_dense_error)},
                      {"mean_fscore", fscores(evaluation.mean_fscore)}}},
                    {"images", images}};
  return doc.dump(2) + "\n";
}

SceneBundle bundle_from_scene(const GroundTruthScene& scene, const SynthBundleOptions& options) {
  if (!(options.match_outlier_fraction >= 0.0 && options.match_outlier_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidInput, "match outlier fraction must lie in [0, 1]");
  }
  SceneBundle bundle;
  bundle.diameter = scene.diameter;
  bundle.cloud = scene.cloud;
  std::vector<PlaneRecord> gt;
  for (const Plane& p : scene.planes) gt.push_back({p, 0.0});
  bundle.ground_truth = gt;

  const std::size_t k = scene.planes.size();
  char name[64];
  for (std::size_t i = 0; i < scene.cameras.size(); ++i) {
    std::snprintf(name, sizeof name, i < k ? "front%02zu" : "orbit%02zu", i < k ? i : i - k);
    bundle.images.push_back({name, scene.cameras[i], scene.depths[i]});
  }

  CounterRng rng(options.seed, 0x4d415443ULL);
  auto add_record = [&](const BundleImage& a, const BundleImage& b) {
    const std::size_t w = a.depth.width(), h = a.depth.height();
    // Pixel (u, v) of a and column u of the flipped b see mirrored points.
    std::vector<std::size_t> usable;
    for (std::size_t v = 0; v < h; ++v)
      for (std::size_t u = 0; u < w; ++u)
        if (a.depth.is_valid(u, v) && b.depth.is_valid(w - 1 - u, v)) usable.push_back(v * w + u);
    const std::size_t count = std::min(options.matches_per_record, usable.size());
    for (std::size_t j = 0; j < count; ++j) {
      std::swap(usable[j], usable[j + rng.below(usable.size() - j)]);
    }
    CorrespondenceRecord rec{a.id, b.id, true, {}};
    for (std::size_t j = 0; j < count; ++j) {
      const long u = long(usable[j] % w), v = long(usable[j] / w);
      std::array<long, 4> m{u, v, u, v};
      if (rng.uniform() < options.match_outlier_fraction) {
        m[2] = long(rng.below(w));
        m[3] = long(rng.below(h));
      }
      rec.matches.push_back(m);
    }
    bundle.records.push_back(std::move(rec));
  };

  for (std::size_t p = 0; p < k; ++p) add_record(bundle.images[p], bundle.images[p]);
  const std::size_t orbit_count = scene.cameras.size() - k;
  for (std::size_t i = 0; i < orbit_count; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const CameraModel cam = mirror_camera(scene.cameras[k + i], scene.planes[p]);
      std::snprintf(name, sizeof name, "orbit%02zu-mirror%02zu", i, p);
      bundle.images.push_back({name, cam, scene.render(cam)});
      const std::size_t b = bundle.images.size() - 1;
      add_record(bundle.images[k + i], bundle.images[b]);
    }
  }
  return bundle;
}

}  // namespace symplane
