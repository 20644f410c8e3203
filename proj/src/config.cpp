#include "symplane/config.hpp"

#include "symplane/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

namespace symplane {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorKind::kInvalidInput,
              "bad value '" + value + "' for config key '" + key + "'");
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) bad_value(key, value);
  return out;
}

template <typename T>
T to_integer(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  bad_value(key, value);
}

using Setter = std::function<void(PipelineConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  constexpr double kDeg = std::numbers::pi / 180.0;
  static const std::map<std::string, Setter> table = {
      {"seed", [](auto& c, auto& k, auto& v) { c.seed = to_integer<std::uint64_t>(k, v); }},
      {"threads", [](auto& c, auto& k, auto& v) { c.threads = to_integer<unsigned>(k, v); }},
      {"ransac.enabled", [](auto& c, auto& k, auto& v) { c.fit.ransac.enabled = to_bool(k, v); }},
      {"ransac.iterations", [](auto& c, auto& k, auto& v) { c.fit.ransac.iterations = to_integer<int>(k, v); }},
      {"ransac.inlier_threshold", [](auto& c, auto& k, auto& v) { c.fit.ransac.inlier_threshold = to_double(k, v); }},
      {"ransac.min_inlier_fraction", [](auto& c, auto& k, auto& v) { c.fit.ransac.min_inlier_fraction = to_double(k, v); }},
      {"fit.max_iterations", [](auto& c, auto& k, auto& v) { c.fit.max_iterations = to_integer<int>(k, v); }},
      {"fit.step_tolerance", [](auto& c, auto& k, auto& v) { c.fit.step_tolerance = to_double(k, v); }},
      {"cluster.eps", [](auto& c, auto& k, auto& v) { c.cluster.eps = to_double(k, v); }},
      {"cluster.min_points", [](auto& c, auto& k, auto& v) { c.cluster.min_points = to_integer<std::size_t>(k, v); }},
      {"cluster.angle_scale_deg", [=](auto& c, auto& k, auto& v) { c.cluster.angle_scale = to_double(k, v) * kDeg; }},
      {"cluster.offset_fraction", [](auto& c, auto& k, auto& v) { c.offset_fraction = to_double(k, v); }},
      {"sdf.logit_threshold", [](auto& c, auto& k, auto& v) { c.logit_threshold = to_double(k, v); }},
      {"sdf.confidence_quantile", [](auto& c, auto& k, auto& v) { c.confidence_quantile = to_double(k, v); }},
      {"sdf.confidence_weighting", [](auto& c, auto& k, auto& v) { c.confidence_weighting = to_bool(k, v); }},
      {"complete.closure_depth", [](auto& c, auto& k, auto& v) { c.closure_depth = to_integer<int>(k, v); }},
      {"visibility.central_fraction", [](auto& c, auto& k, auto& v) { c.visibility.central_fraction = to_double(k, v); }},
      {"visibility.min_valid_pixels", [](auto& c, auto& k, auto& v) { c.visibility.min_valid_pixels = to_integer<std::size_t>(k, v); }},
      {"visibility.min_side_fraction", [](auto& c, auto& k, auto& v) { c.visibility.min_side_fraction = to_double(k, v); }},
      {"eval.fscore_thresholds", [](auto& c, auto& k, auto& v) {
         c.fscore_thresholds.clear();
         std::istringstream in(v);
         std::string item;
         while (std::getline(in, item, ',')) c.fscore_thresholds.push_back(to_double(k, trim(item)));
       }},
  };
  return table;
}

}  // namespace

ClusterConfig PipelineConfig::cluster_for(double diameter) const {
  ClusterConfig out = cluster;
  out.offset_scale = offset_fraction * diameter;
  out.threads = threads;
  return out;
}

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorKind::kInvalidInput, "config: " + what);
  };
  if (threads == 0) fail("threads must be at least 1");
  if (fit.ransac.iterations < 1) fail("ransac.iterations must be positive");
  if (!(fit.ransac.inlier_threshold > 0.0)) fail("ransac.inlier_threshold must be positive");
  if (!(fit.ransac.min_inlier_fraction >= 0.0 && fit.ransac.min_inlier_fraction <= 1.0))
    fail("ransac.min_inlier_fraction must lie in [0, 1]");
  if (fit.max_iterations < 1) fail("fit.max_iterations must be positive");
  if (!(offset_fraction > 0.0)) fail("cluster.offset_fraction must be positive");
  if (!(confidence_quantile >= 0.0 && confidence_quantile <= 1.0))
    fail("sdf.confidence_quantile must lie in [0, 1]");
  if (closure_depth < 1) fail("complete.closure_depth must be at least 1");
  if (!(visibility.central_fraction > 0.0 && visibility.central_fraction <= 1.0))
    fail("visibility.central_fraction must lie in (0, 1]");
  if (fscore_thresholds.empty()) fail("eval.fscore_thresholds is empty");
  for (double t : fscore_thresholds)
    if (!(t > 0.0)) fail("F-score thresholds must be positive");
  cluster.validate();
}

void apply_setting(PipelineConfig& config, const std::string& key,
                   const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) {
    throw Error(ErrorKind::kInvalidInput, "unknown config key '" + key + "'");
  }
  it->second(config, key, value);
}

PipelineConfig parse_config(std::istream& in) {
  PipelineConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kInvalidInput,
                  "config line " + std::to_string(lineno) + ": expected key = value");
    }
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open config " + path);
  return parse_config(in);
}

}  // namespace symplane
