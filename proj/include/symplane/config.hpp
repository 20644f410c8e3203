#pragma once

#include "symplane/metrics.hpp"
#include "symplane/plane_cluster.hpp"
#include "symplane/plane_fit.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace symplane {

/// Settings shared by the pipeline stages. Loaded from `key = value` text;
/// '#' starts a comment.
struct PipelineConfig {
  std::uint64_t seed = 0;
  unsigned threads = 1;

  ReflectionFitOptions fit = default_fit();
  ClusterConfig cluster;
  /// Cluster offset scale as a fraction of the scene diameter.
  double offset_fraction = 0.02;

  double logit_threshold = 0.0;
  double confidence_quantile = 0.5;
  bool confidence_weighting = false;

  int closure_depth = 2;

  VisibilityOptions visibility;
  std::vector<double> fscore_thresholds{1.0, 5.0, 15.0};

  /// Cluster settings scaled to a scene of the given diameter.
  ClusterConfig cluster_for(double diameter) const;
  void validate() const;

  static ReflectionFitOptions default_fit() {
    ReflectionFitOptions o;
    o.ransac.enabled = true;
    return o;
  }
};

/// Applies one setting. Unknown keys and malformed values throw
/// invalid-input.
void apply_setting(PipelineConfig& config, const std::string& key,
                   const std::string& value);
PipelineConfig parse_config(std::istream& in);
PipelineConfig load_config(const std::string& path);

}  // namespace symplane
