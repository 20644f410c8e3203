#include "symplane/plane_cluster.hpp"

#include "symplane/error.hpp"
#include "symplane/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

namespace symplane {
namespace {

// atan2 keeps full precision for nearly parallel normals, where acos does not.
double line_angle(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double weighted_median(std::vector<std::pair<double, double>> values) {
  std::sort(values.begin(), values.end());
  double total = 0.0;
  for (const auto& [v, w] : values) total += w;
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i].second;
    if (running >= 0.5 * total) {
      // Exactly half the weight on each side: average the two middle values.
      if (running == 0.5 * total && i + 1 < values.size()) {
        return 0.5 * (values[i].first + values[i + 1].first);
      }
      return values[i].first;
    }
  }
  return values.back().first;
}

}  // namespace

ClusterConfig ClusterConfig::for_diameter(double scene_diameter) {
  ClusterConfig config;
  config.offset_scale = 0.02 * scene_diameter;
  return config;
}

void ClusterConfig::validate() const {
  if (!(eps > 0.0) || min_points < 1 || !(angle_scale > 0.0) ||
      !(offset_scale > 0.0)) {
    throw Error(ErrorKind::kInvalidInput,
                "cluster config needs eps > 0, min_points >= 1 and positive "
                "scales");
  }
}

double plane_distance(const Plane& a, const Plane& b, double angle_scale,
                      double offset_scale) {
  const double same = line_angle(a.normal, b.normal) / angle_scale +
                      std::abs(a.offset - b.offset) / offset_scale;
  const double flipped = line_angle(a.normal, -b.normal) / angle_scale +
                         std::abs(a.offset + b.offset) / offset_scale;
  return std::min(same, flipped);
}

Plane cluster_center(const std::vector<CandidatePlane>& candidates,
                     const std::vector<std::size_t>& members) {
  Mat3 scatter = Mat3::Zero();
  for (std::size_t i : members) {
    const CandidatePlane& c = candidates[i];
    scatter += c.weight * c.plane.normal * c.plane.normal.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  Vec3 normal = solver.eigenvectors().col(2).normalized();

  double vote = 0.0;
  for (std::size_t i : members) {
    const CandidatePlane& c = candidates[i];
    vote += c.weight * (c.plane.normal.dot(normal) >= 0.0 ? 1.0 : -1.0);
  }
  if (vote < 0.0) normal = -normal;

  std::vector<std::pair<double, double>> offsets;
  offsets.reserve(members.size());
  for (std::size_t i : members) {
    const CandidatePlane& c = candidates[i];
    const double sign = c.plane.normal.dot(normal) >= 0.0 ? 1.0 : -1.0;
    offsets.emplace_back(sign * c.plane.offset, c.weight);
  }
  return canonicalize(Plane{normal, weighted_median(std::move(offsets))});
}

std::vector<PlaneCluster> cluster_planes(
    const std::vector<CandidatePlane>& candidates, const ClusterConfig& config) {
  config.validate();
  const std::size_t count = candidates.size();
  for (const CandidatePlane& c : candidates) {
    validate_plane(c.plane);
    if (!(c.weight > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "candidate weight must be positive");
    }
  }
  if (count == 0) return {};

  // Neighbour lists are built in index order, which fixes border-point
  // assignment independently of thread count.
  std::vector<std::vector<std::size_t>> neighbours(count);
  parallel_for(count, config.threads, [&](std::size_t i) {
    for (std::size_t j = 0; j < count; ++j) {
      if (plane_distance(candidates[i].plane, candidates[j].plane,
                         config.angle_scale, config.offset_scale) <= config.eps) {
        neighbours[i].push_back(j);
      }
    }
  });

  constexpr long kUnvisited = -2;
  constexpr long kNoise = -1;
  std::vector<long> label(count, kUnvisited);
  long next_cluster = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (label[i] != kUnvisited) continue;
    if (neighbours[i].size() < config.min_points) {
      label[i] = kNoise;
      continue;
    }
    const long id = next_cluster++;
    label[i] = id;
    std::deque<std::size_t> frontier(neighbours[i].begin(), neighbours[i].end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (label[j] == kNoise) label[j] = id;  // border point
      if (label[j] != kUnvisited) continue;
      label[j] = id;
      if (neighbours[j].size() >= config.min_points) {
        frontier.insert(frontier.end(), neighbours[j].begin(),
                        neighbours[j].end());
      }
    }
  }

  std::vector<PlaneCluster> clusters(static_cast<std::size_t>(next_cluster));
  for (std::size_t i = 0; i < count; ++i) {
    if (label[i] < 0) continue;
    PlaneCluster& cluster = clusters[static_cast<std::size_t>(label[i])];
    cluster.members.push_back(i);
    cluster.support += candidates[i].weight;
  }
  for (PlaneCluster& cluster : clusters) {
    cluster.center = cluster_center(candidates, cluster.members);
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const PlaneCluster& a, const PlaneCluster& b) {
                     if (a.support != b.support) return a.support > b.support;
                     return a.members.front() < b.members.front();
                   });
  return clusters;
}

}  // namespace symplane
