#include "symplane/formats.hpp"

#include "symplane/error.hpp"

#include "json.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace symplane {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void io_error(const std::string& what) { throw Error(ErrorKind::kIo, what); }
[[noreturn]] void bad_file(const std::string& path, const std::string& what) {
  throw Error(ErrorKind::kInvalidInput, path + ": " + what);
}

json parse_json(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bad_file(where, e.what());
  }
}

double number(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_number()) bad_file(where, std::string("missing number '") + key + "'");
  return j.at(key).get<double>();
}

template <int N>
Eigen::Matrix<double, N, 1> numbers(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array() || j.at(key).size() != N) {
    bad_file(where, std::string("'") + key + "' must hold " + std::to_string(N) + " numbers");
  }
  Eigen::Matrix<double, N, 1> out;
  for (int i = 0; i < N; ++i) {
    const json& v = j.at(key)[i];
    if (!v.is_number()) bad_file(where, std::string("'") + key + "' must hold numbers");
    out[i] = v.get<double>();
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void put_u16(std::string& out, std::uint16_t x) {
  out.push_back(char(x & 0xff));
  out.push_back(char(x >> 8));
}
void put_u32(std::string& out, std::uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(char((x >> (8 * i)) & 0xff));
}
void put_f32(std::string& out, double x) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(x)));
}
std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t x = 0;
  for (int i = 0; i < 4; ++i) x |= std::uint32_t(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return x;
}
double get_f32(const std::string& in, std::size_t at) {
  return std::bit_cast<float>(get_u32(in, at));
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) io_error("cannot write " + path);
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) io_error("short write to " + path);
  }
  fs::rename(tmp, target);
}

std::string planes_to_json(const std::vector<PlaneRecord>& planes) {
  json list = json::array();
  for (const PlaneRecord& r : planes) {
    const Vec3& n = r.plane.normal;
    list.push_back({{"normal", {n.x(), n.y(), n.z()}},
                    {"offset", r.plane.offset},
                    {"support", r.support}});
  }
  return dump(json{{"planes", list}});
}

std::vector<PlaneRecord> planes_from_json(const std::string& text) {
  const json doc = parse_json(text, "planes");
  if (!doc.contains("planes") || !doc.at("planes").is_array()) {
    bad_file("planes", "expected a 'planes' array");
  }
  std::vector<PlaneRecord> out;
  for (const json& item : doc.at("planes")) {
    PlaneRecord r;
    r.plane.normal = numbers<3>(item, "normal", "planes");
    r.plane.offset = number(item, "offset", "planes");
    r.support = item.contains("support") ? number(item, "support", "planes") : 0.0;
    validate_plane(r.plane);
    out.push_back(r);
  }
  return out;
}

void write_planes(const std::string& path, const std::vector<PlaneRecord>& planes) {
  write_text(path, planes_to_json(planes));
}

std::vector<PlaneRecord> read_planes(const std::string& path) {
  return planes_from_json(read_text(path));
}

void write_camera(const std::string& path, const CameraModel& c) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) rot.push_back(c.rotation(r, k));
  const json doc = {{"fx", c.fx},
                    {"fy", c.fy},
                    {"cx", c.cx},
                    {"cy", c.cy},
                    {"rotation", rot},
                    {"translation", {c.translation.x(), c.translation.y(), c.translation.z()}},
                    {"convention", "world-to-camera"}};
  write_text(path, dump(doc));
}

CameraModel read_camera(const std::string& path) {
  const json doc = parse_json(read_text(path), path);
  if (doc.value("convention", std::string()) != "world-to-camera") {
    bad_file(path, "camera convention must be \"world-to-camera\"");
  }
  CameraModel c;
  c.fx = number(doc, "fx", path);
  c.fy = number(doc, "fy", path);
  c.cx = number(doc, "cx", path);
  c.cy = number(doc, "cy", path);
  const auto rot = numbers<9>(doc, "rotation", path);
  for (int r = 0; r < 3; ++r)
    for (int k = 0; k < 3; ++k) c.rotation(r, k) = rot[3 * r + k];
  c.translation = numbers<3>(doc, "translation", path);
  validate_camera(c);
  return c;
}

void write_symd(const std::string& path, const Grid<double>& values) {
  if (values.width() > std::numeric_limits<std::uint32_t>::max() ||
      values.height() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorKind::kInvalidInput, "grid too large for SYMD");
  }
  std::string out = "SYMD";
  put_u16(out, 1);
  put_u32(out, std::uint32_t(values.width()));
  put_u32(out, std::uint32_t(values.height()));
  out.reserve(out.size() + 4 * values.size());
  for (double v : values.data()) put_f32(out, std::isnan(v) ? std::numeric_limits<double>::quiet_NaN() : v);
  write_text(path, out);
}

Grid<double> read_symd(const std::string& path) {
  const std::string in = read_text(path);
  constexpr std::size_t kHeader = 14;
  if (in.size() < kHeader || in.compare(0, 4, "SYMD") != 0) bad_file(path, "not a SYMD file");
  const unsigned version = unsigned(static_cast<unsigned char>(in[4])) |
                           unsigned(static_cast<unsigned char>(in[5])) << 8;
  if (version != 1) bad_file(path, "unsupported SYMD version " + std::to_string(version));
  const std::size_t width = get_u32(in, 6);
  const std::size_t height = get_u32(in, 10);
  if (in.size() != kHeader + 4 * width * height) bad_file(path, "SYMD size does not match its header");
  Grid<double> out(width, height, 0.0);
  std::size_t at = kHeader;
  for (double& v : out.data()) {
    v = get_f32(in, at);
    at += 4;
  }
  return out;
}

void write_depth(const std::string& path, const DepthMap& depth) {
  write_symd(path, depth.depth);
}

DepthMap read_depth(const std::string& path) {
  DepthMap out;
  out.depth = read_symd(path);
  return out;
}

void write_ply(const std::string& path, const PlyCloud& cloud) {
  const bool with_conf = !cloud.confidence.empty();
  if (with_conf && cloud.confidence.size() != cloud.points.size()) {
    throw Error(ErrorKind::kInvalidInput, "confidence count differs from point count");
  }
  if (cloud.grid_width * cloud.grid_height != 0 &&
      cloud.grid_width * cloud.grid_height != cloud.points.size()) {
    throw Error(ErrorKind::kInvalidInput, "grid size differs from point count");
  }
  std::ostringstream header;
  header << "ply\nformat binary_little_endian 1.0\n";
  if (cloud.grid_width * cloud.grid_height != 0) {
    header << "comment grid " << cloud.grid_width << ' ' << cloud.grid_height << '\n';
  }
  header << "element vertex " << cloud.points.size() << '\n'
         << "property float x\nproperty float y\nproperty float z\n";
  if (with_conf) header << "property float confidence\n";
  header << "end_header\n";
  std::string out = header.str();
  out.reserve(out.size() + cloud.points.size() * (with_conf ? 16 : 12));
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    for (int k = 0; k < 3; ++k) put_f32(out, cloud.points[i][k]);
    if (with_conf) put_f32(out, cloud.confidence[i]);
  }
  write_text(path, out);
}

PlyCloud read_ply(const std::string& path) {
  const std::string in = read_text(path);
  const std::string end_marker = "end_header\n";
  const auto end = in.find(end_marker);
  if (in.compare(0, 4, "ply\n") != 0 || end == std::string::npos) bad_file(path, "not a PLY file");
  std::istringstream header(in.substr(0, end));
  std::string line;
  std::size_t count = 0;
  bool have_vertex = false;
  std::vector<std::string> props;
  PlyCloud out;
  while (std::getline(header, line)) {
    std::istringstream words(line);
    std::string word;
    words >> word;
    if (word == "format") {
      std::string fmt;
      words >> fmt;
      if (fmt != "binary_little_endian") bad_file(path, "only binary_little_endian PLY is supported");
    } else if (word == "comment") {
      std::string tag;
      if (words >> tag && tag == "grid") words >> out.grid_width >> out.grid_height;
    } else if (word == "element") {
      std::string name;
      words >> name >> count;
      if (name != "vertex" || have_vertex) bad_file(path, "expected a single vertex element");
      have_vertex = true;
    } else if (word == "property") {
      std::string type, name;
      words >> type >> name;
      if (type != "float" && type != "float32") bad_file(path, "unsupported property type " + type);
      props.push_back(name);
    }
  }
  int ix = -1, iy = -1, iz = -1, ic = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i] == "x") ix = int(i);
    if (props[i] == "y") iy = int(i);
    if (props[i] == "z") iz = int(i);
    if (props[i] == "confidence") ic = int(i);
  }
  if (ix < 0 || iy < 0 || iz < 0) bad_file(path, "missing x, y or z property");
  const std::size_t stride = 4 * props.size();
  const std::size_t body = end + end_marker.size();
  if (in.size() != body + stride * count) bad_file(path, "PLY body size does not match its header");
  if (out.grid_width * out.grid_height != 0 && out.grid_width * out.grid_height != count) {
    bad_file(path, "grid comment does not match the vertex count");
  }
  out.points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = body + i * stride;
    out.points.emplace_back(get_f32(in, at + 4 * ix), get_f32(in, at + 4 * iy), get_f32(in, at + 4 * iz));
    if (ic >= 0) out.confidence.push_back(get_f32(in, at + 4 * ic));
  }
  return out;
}

void write_point_map(const std::string& path, const PointMap& map) {
  PlyCloud cloud;
  cloud.grid_width = map.width();
  cloud.grid_height = map.height();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t v = 0; v < map.height(); ++v)
    for (std::size_t u = 0; u < map.width(); ++u)
      cloud.points.push_back(map.valid(u, v) ? map.points(u, v) : Vec3(nan, nan, nan));
  write_ply(path, cloud);
}

PointMap read_point_map(const std::string& path) {
  const PlyCloud cloud = read_ply(path);
  if (cloud.grid_width * cloud.grid_height == 0) bad_file(path, "PLY has no grid comment");
  PointMap map(cloud.grid_width, cloud.grid_height);
  std::size_t i = 0;
  for (std::size_t v = 0; v < map.height(); ++v) {
    for (std::size_t u = 0; u < map.width(); ++u, ++i) {
      const Vec3& p = cloud.points[i];
      if (p.allFinite()) {
        map.points(u, v) = p;
        map.valid(u, v) = 1;
      }
    }
  }
  return map;
}

PointCloud read_cloud(const std::string& path) {
  PlyCloud cloud = read_ply(path);
  PointCloud out;
  out.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points)
    if (p.allFinite()) out.push_back(p);
  return out;
}

void write_correspondences(const std::string& path,
                           const std::vector<CorrespondenceRecord>& records) {
  std::string out;
  for (const CorrespondenceRecord& r : records) {
    json matches = json::array();
    for (const auto& m : r.matches) matches.push_back({m[0], m[1], m[2], m[3]});
    out += json{{"image_a", r.image_a},
                {"image_b", r.image_b},
                {"flipped_b", r.flipped_b},
                {"matches", matches}}
               .dump();
    out += '\n';
  }
  write_text(path, out);
}

std::vector<CorrespondenceRecord> read_correspondences(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<CorrespondenceRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    const json j = parse_json(line, where);
    CorrespondenceRecord r;
    try {
      r.image_a = j.at("image_a").get<std::string>();
      r.image_b = j.at("image_b").get<std::string>();
      r.flipped_b = j.value("flipped_b", true);
      for (const json& m : j.at("matches")) {
        if (!m.is_array() || m.size() != 4) bad_file(where, "a match needs 4 pixel coordinates");
        r.matches.push_back({m[0].get<long>(), m[1].get<long>(), m[2].get<long>(), m[3].get<long>()});
      }
    } catch (const json::exception& e) {
      bad_file(where, e.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_pairs(const std::string& path, const PointPairSet& pairs) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const Vec3& a = pairs.first[k];
    const Vec3& b = pairs.second[k];
    out << a.x() << ' ' << a.y() << ' ' << a.z() << ' ' << b.x() << ' ' << b.y() << ' ' << b.z() << '\n';
  }
  write_text(path, out.str());
}

PointPairSet read_pairs(const std::string& path) {
  std::istringstream in(read_text(path));
  PointPairSet pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream words(line);
    double x[6];
    std::string extra;
    for (double& v : x) {
      if (!(words >> v)) bad_file(path, "line " + std::to_string(lineno) + ": expected 6 numbers");
    }
    if (words >> extra) bad_file(path, "line " + std::to_string(lineno) + ": expected 6 numbers");
    pairs.add(Vec3(x[0], x[1], x[2]), Vec3(x[3], x[4], x[5]));
  }
  return pairs;
}

PredictionManifest read_prediction_manifest(const std::string& path) {
  const json doc = parse_json(read_text(path), path);
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& rel) { return (base / rel).string(); };
  PredictionManifest m;
  try {
    m.point_map = resolve(doc.at("point_map").get<std::string>());
    for (const json& inst : doc.at("instances")) {
      PredictionInstance p;
      p.sdf = resolve(inst.at("sdf").get<std::string>());
      if (inst.contains("confidence")) p.confidence = resolve(inst.at("confidence").get<std::string>());
      p.logit = inst.at("logit").get<double>();
      m.instances.push_back(p);
    }
  } catch (const json::exception& e) {
    bad_file(path, e.what());
  }
  return m;
}

void write_prediction_manifest(const std::string& path, const PredictionManifest& manifest) {
  json inst = json::array();
  for (const PredictionInstance& p : manifest.instances) {
    json j = {{"sdf", p.sdf}, {"logit", p.logit}};
    if (!p.confidence.empty()) j["confidence"] = p.confidence;
    inst.push_back(j);
  }
  write_text(path, dump(json{{"point_map", manifest.point_map}, {"instances", inst}}));
}

}  // namespace symplane
