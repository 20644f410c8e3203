#include "symplane/bundle.hpp"

#include "symplane/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>

namespace symplane {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad_bundle(const std::string& what) {
  throw Error(ErrorKind::kInvalidBundle, what);
}

std::string existing(const fs::path& dir, const json& manifest, const char* key) {
  const std::string rel = manifest.at(key).get<std::string>();
  const fs::path p = dir / rel;
  if (!fs::exists(p)) bad_bundle("bundle references missing file " + rel);
  return p.string();
}

}  // namespace

const BundleImage& SceneBundle::image(const std::string& id) const {
  for (const BundleImage& img : images)
    if (img.id == id) return img;
  bad_bundle("unknown image id '" + id + "'");
}

void SceneBundle::validate() const {
  std::set<std::string> ids;
  for (const BundleImage& img : images) {
    const bool safe = !img.id.empty() && img.id.front() != '.' &&
                      std::all_of(img.id.begin(), img.id.end(), [](char c) {
                        return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
                      });
    if (!safe) bad_bundle("image id '" + img.id + "' is not a plain file name");
    if (!ids.insert(img.id).second) bad_bundle("duplicate image id '" + img.id + "'");
  }
  for (std::size_t r = 0; r < records.size(); ++r) {
    const CorrespondenceRecord& rec = records[r];
    const BundleImage& a = image(rec.image_a);
    const BundleImage& b = image(rec.image_b);
    for (const auto& m : rec.matches) {
      if (m[0] < 0 || m[1] < 0 || m[2] < 0 || m[3] < 0 ||
          std::size_t(m[0]) >= a.depth.width() || std::size_t(m[1]) >= a.depth.height() ||
          std::size_t(m[2]) >= b.depth.width() || std::size_t(m[3]) >= b.depth.height()) {
        bad_bundle("record " + std::to_string(r) + " has a match outside its images");
      }
    }
  }
  for (const auto& [id, planes] : predictions) {
    if (!ids.count(id)) bad_bundle("prediction for unknown image '" + id + "'");
  }
}

double SceneBundle::scene_diameter() const {
  if (diameter > 0.0) return diameter;
  if (!cloud.empty()) return symplane::diameter(cloud);
  PointCloud pts;
  for (const BundleImage& img : images) {
    const PointMap map = unproject_depth_map(img.depth, img.camera);
    for (std::size_t i = 0; i < map.points.size(); ++i)
      if (map.valid.data()[i]) pts.push_back(map.points.data()[i]);
  }
  if (pts.size() < 2) throw Error(ErrorKind::kInsufficientData, "bundle has no geometry to measure");
  return symplane::diameter(pts);
}

SceneBundle load_bundle(const std::string& dir_str) {
  const fs::path dir(dir_str);
  const fs::path manifest_path = dir / "bundle.json";
  if (!fs::exists(manifest_path)) bad_bundle("no bundle.json in " + dir_str);
  SceneBundle bundle;
  try {
    const json m = json::parse(read_text(manifest_path.string()));
    bundle.diameter = m.value("diameter", 0.0);
    for (const json& img : m.at("images")) {
      BundleImage entry;
      entry.id = img.at("id").get<std::string>();
      entry.camera = read_camera(existing(dir, img, "camera"));
      entry.depth = read_depth(existing(dir, img, "depth"));
      bundle.images.push_back(std::move(entry));
    }
    if (m.contains("correspondences"))
      bundle.records = read_correspondences(existing(dir, m, "correspondences"));
    if (m.contains("cloud")) bundle.cloud = read_cloud(existing(dir, m, "cloud"));
    if (m.contains("ground_truth")) bundle.ground_truth = read_planes(existing(dir, m, "ground_truth"));
    if (m.contains("annotated")) bundle.annotated = read_planes(existing(dir, m, "annotated"));
    if (m.contains("predictions")) {
      for (const auto& [id, rel] : m.at("predictions").items()) {
        const fs::path p = dir / rel.get<std::string>();
        if (!fs::exists(p)) bad_bundle("bundle references missing file " + rel.get<std::string>());
        std::vector<Plane> planes;
        for (const PlaneRecord& r : read_planes(p.string())) planes.push_back(r.plane);
        bundle.predictions[id] = std::move(planes);
      }
    }
  } catch (const json::exception& e) {
    bad_bundle(std::string("malformed bundle.json: ") + e.what());
  }
  bundle.validate();
  return bundle;
}

void save_bundle(const std::string& dir_str, const SceneBundle& bundle) {
  bundle.validate();
  const fs::path dir(dir_str);
  fs::create_directories(dir);
  json m;
  m["diameter"] = bundle.diameter;
  json images = json::array();
  for (const BundleImage& img : bundle.images) {
    const std::string cam = "cameras/" + img.id + ".json";
    const std::string depth = "depths/" + img.id + ".symd";
    write_camera((dir / cam).string(), img.camera);
    write_depth((dir / depth).string(), img.depth);
    images.push_back({{"id", img.id}, {"camera", cam}, {"depth", depth}});
  }
  m["images"] = images;
  m["correspondences"] = "correspondences.jsonl";
  write_correspondences((dir / "correspondences.jsonl").string(), bundle.records);
  if (!bundle.cloud.empty()) {
    m["cloud"] = "cloud.ply";
    write_ply((dir / "cloud.ply").string(), PlyCloud{bundle.cloud, {}, 0, 0});
  }
  if (bundle.ground_truth) {
    m["ground_truth"] = "ground_truth.json";
    write_planes((dir / "ground_truth.json").string(), *bundle.ground_truth);
  }
  if (!bundle.annotated.empty()) {
    m["annotated"] = "planes.json";
    write_planes((dir / "planes.json").string(), bundle.annotated);
  }
  if (!bundle.predictions.empty()) {
    json preds = json::object();
    for (const auto& [id, planes] : bundle.predictions) {
      const std::string rel = "predictions/" + id + ".json";
      std::vector<PlaneRecord> records;
      for (const Plane& p : planes) records.push_back({p, 0.0});
      write_planes((dir / rel).string(), records);
      preds[id] = rel;
    }
    m["predictions"] = preds;
  }
  write_text((dir / "bundle.json").string(), m.dump(2) + "\n");
}

}  // namespace symplane
