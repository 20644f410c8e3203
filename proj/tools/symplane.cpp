// Command-line front end: synthetic scenes, annotation, fitting, clustering,
// detector post-processing, completion and evaluation.
#include "symplane/bundle.hpp"
#include "symplane/config.hpp"
#include "symplane/error.hpp"
#include "symplane/formats.hpp"
#include "symplane/pipeline.hpp"
#include "symplane/scene_synth.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace symplane;

constexpr int kExitValidation = 2;
constexpr int kExitDegenerate = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  PipelineConfig load() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    c.validate();
    return c;
  }
};

std::vector<Plane> plane_list(const std::vector<PlaneRecord>& records) {
  std::vector<Plane> out;
  for (const PlaneRecord& r : records) out.push_back(r.plane);
  return out;
}

void print_planes(const std::vector<PlaneRecord>& planes) {
  for (const PlaneRecord& r : planes) {
    const Vec3& n = r.plane.normal;
    std::printf("plane n=(%.9f, %.9f, %.9f) d=%.9g support=%g\n", n.x(), n.y(), n.z(),
                r.plane.offset, r.support);
  }
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInsufficientData:
    case ErrorKind::kDegenerateConfiguration:
      return kExitDegenerate;
    default:
      return kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reflective symmetry plane toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "key = value settings file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed (overrides the config)");
  app.add_option("--threads", g.threads, "worker threads (overrides the config)")
      ->check(CLI::PositiveNumber);

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic symmetric scene bundle");
  std::string shape_name = "box-facade", synth_out;
  SceneSpec spec;
  SynthBundleOptions bundle_opts;
  synth->add_option("--shape", shape_name, "box-facade | cross-plan | octagon-tower");
  synth->add_option("--symmetry", spec.symmetry_count, "number of symmetry planes");
  synth->add_option("--diameter", spec.diameter);
  synth->add_option("--noise", spec.noise_sigma, "cloud noise, fraction of the diameter");
  synth->add_option("--outliers", spec.outlier_fraction, "fraction of cloud outliers");
  synth->add_option("--cameras", spec.camera_count, "orbiting cameras");
  synth->add_option("--width", spec.width);
  synth->add_option("--height", spec.height);
  synth->add_option("--points", spec.point_count);
  synth->add_option("--matches", bundle_opts.matches_per_record, "matches per record");
  synth->add_option("--match-outliers", bundle_opts.match_outlier_fraction);
  synth->add_option("--out", synth_out, "bundle directory")->required();

  // annotate
  auto* annotate = app.add_subcommand("annotate", "fit and cluster planes from a bundle's records");
  std::string annotate_bundle, annotate_out;
  annotate->add_option("--bundle", annotate_bundle)->required()->check(CLI::ExistingDirectory);
  annotate->add_option("--out", annotate_out, "also write the planes here");

  // fit
  auto* fit = app.add_subcommand("fit", "fit one reflection plane to 3D point pairs");
  std::string pairs_path, fit_out;
  bool ransac = false;
  fit->add_option("--pairs", pairs_path, "text file, 6 numbers per line")->required()->check(CLI::ExistingFile);
  fit->add_flag("--ransac", ransac);
  fit->add_option("--out", fit_out)->required();

  // cluster
  auto* cluster = app.add_subcommand("cluster", "cluster candidate planes");
  std::string candidates_path, cluster_out;
  double cluster_diameter = 0.0;
  cluster->add_option("--candidates", candidates_path)->required()->check(CLI::ExistingFile);
  cluster->add_option("--diameter", cluster_diameter, "scene diameter")->required()->check(CLI::PositiveNumber);
  cluster->add_option("--out", cluster_out)->required();

  // planes-from-sdf
  auto* from_sdf = app.add_subcommand("planes-from-sdf", "planes from predicted signed distance maps");
  std::string manifest_path, sdf_out;
  std::optional<double> logit_threshold, quantile;
  from_sdf->add_option("--manifest", manifest_path)->required()->check(CLI::ExistingFile);
  from_sdf->add_option("--logit-threshold", logit_threshold);
  from_sdf->add_option("--quantile", quantile);
  from_sdf->add_option("--out", sdf_out)->required();

  // complete
  auto* complete = app.add_subcommand("complete", "reflect a cloud across planes");
  std::string complete_in, complete_planes, complete_out;
  std::optional<int> closure_depth;
  complete->add_option("--points", complete_in, "PLY cloud or point map")->required()->check(CLI::ExistingFile);
  complete->add_option("--planes", complete_planes)->required()->check(CLI::ExistingFile);
  complete->add_option("--depth", closure_depth, "reflection closure depth");
  complete->add_option("--out", complete_out)->required();

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
  std::string eval_bundle, eval_predictions, eval_out;
  eval->add_option("--bundle", eval_bundle)->required()->check(CLI::ExistingDirectory);
  eval->add_option("--predictions", eval_predictions,
                   "planes used for every image; defaults to per-image predictions, then annotated planes")
      ->check(CLI::ExistingFile);
  eval->add_option("--out", eval_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    PipelineConfig config = g.load();

    if (*synth) {
      const auto shape = parse_shape(shape_name);
      if (!shape) throw Error(ErrorKind::kInvalidInput, "unknown shape '" + shape_name + "'");
      spec.shape = *shape;
      spec.seed = config.seed;
      bundle_opts.seed = config.seed;
      const GroundTruthScene scene = generate_scene(spec);
      const SceneBundle bundle = bundle_from_scene(scene, bundle_opts);
      save_bundle(synth_out, bundle);
      std::printf("wrote %zu images, %zu records, %zu points, %zu planes to %s\n",
                  bundle.images.size(), bundle.records.size(), bundle.cloud.size(),
                  scene.planes.size(), synth_out.c_str());
    } else if (*annotate) {
      SceneBundle bundle = load_bundle(annotate_bundle);
      const AnnotationResult result = annotate_scene(bundle, config);
      for (const std::string& line : result.log) std::fprintf(stderr, "warning: %s\n", line.c_str());
      save_bundle(annotate_bundle, bundle);
      if (!annotate_out.empty()) write_planes(annotate_out, bundle.annotated);
      std::printf("%zu candidates, %zu clusters\n", result.candidates.size(), result.clusters.size());
      print_planes(bundle.annotated);
    } else if (*fit) {
      ReflectionFitOptions options = config.fit;
      options.ransac.enabled = ransac;
      options.ransac.seed = config.seed;
      const FitReport report = fit_reflection_plane(read_pairs(pairs_path), options);
      const std::vector<PlaneRecord> planes{{report.plane, double(report.inlier_count)}};
      write_planes(fit_out, planes);
      std::printf("rms residual %.6g over %zu inliers\n", report.rms_residual, report.inlier_count);
      print_planes(planes);
    } else if (*cluster) {
      std::vector<CandidatePlane> candidates;
      for (const PlaneRecord& r : read_planes(candidates_path)) {
        candidates.push_back({r.plane, r.support > 0.0 ? r.support : 1.0, {}});
      }
      std::vector<PlaneRecord> planes;
      for (const PlaneCluster& c : cluster_planes(candidates, config.cluster_for(cluster_diameter))) {
        planes.push_back({c.center, c.support});
      }
      write_planes(cluster_out, planes);
      print_planes(planes);
    } else if (*from_sdf) {
      const PredictionManifest manifest = read_prediction_manifest(manifest_path);
      const PointMap point_map = read_point_map(manifest.point_map);
      std::vector<SignedDistanceMap> maps;
      std::vector<double> logits;
      for (const PredictionInstance& inst : manifest.instances) {
        SignedDistanceMap m;
        m.sdf = read_symd(inst.sdf);
        m.valid = Grid<unsigned char>(m.sdf.width(), m.sdf.height(), 0);
        for (std::size_t i = 0; i < m.sdf.size(); ++i) m.valid.data()[i] = std::isfinite(m.sdf.data()[i]);
        if (!inst.confidence.empty()) m.confidence = read_symd(inst.confidence);
        maps.push_back(std::move(m));
        logits.push_back(inst.logit);
      }
      const SdfPlanes result = planes_from_prediction(
          point_map, maps, logits, logit_threshold.value_or(config.logit_threshold),
          quantile.value_or(config.confidence_quantile), config.confidence_weighting);
      for (const std::string& line : result.warnings) std::fprintf(stderr, "warning: %s\n", line.c_str());
      std::vector<PlaneRecord> planes;
      for (const FitReport& f : result.fits) planes.push_back({f.plane, double(f.inlier_count)});
      write_planes(sdf_out, planes);
      print_planes(planes);
    } else if (*complete) {
      const PointCloud points = read_cloud(complete_in);
      const PointCloud out = complete_cloud(points, plane_list(read_planes(complete_planes)),
                                            closure_depth.value_or(config.closure_depth));
      write_ply(complete_out, PlyCloud{out, {}, 0, 0});
      std::printf("%zu points in, %zu points out\n", points.size(), out.size());
    } else if (*eval) {
      const SceneBundle bundle = load_bundle(eval_bundle);
      std::optional<std::vector<Plane>> shared;
      if (!eval_predictions.empty()) {
        shared = plane_list(read_planes(eval_predictions));
      } else if (bundle.predictions.empty()) {
        if (bundle.annotated.empty()) {
          throw Error(ErrorKind::kInvalidBundle, "bundle has neither predictions nor annotated planes");
        }
        shared = plane_list(bundle.annotated);
      }
      const SceneEvaluation ev = evaluate_scene(bundle, config, shared ? &*shared : nullptr);
      write_text(eval_out, evaluation_to_json(ev));
      std::printf("%zu images evaluated: median geodesic %.6g deg, median dense error %.6g\n",
                  ev.evaluated_images, ev.median_geodesic, ev.median_dense_error);
      for (const auto& [t, f] : ev.mean_fscore) std::printf("F@%g = %.6g\n", t, f);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
