#include "symplane/plane_fit.hpp"

#include "symplane/error.hpp"
#include "symplane/kernels.hpp"
#include "symplane/random.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace symplane {
namespace {

std::array<double, 4> coefficients(const Plane& plane) {
  return {plane.normal.x(), plane.normal.y(), plane.normal.z(), plane.offset};
}

// Orthonormal basis of the tangent plane at unit vector n.
void tangent_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
  Vec3 helper = Vec3::UnitX();
  if (std::abs(n.x()) > std::abs(n.y()) && std::abs(n.x()) > std::abs(n.z())) {
    helper = Vec3::UnitY();
  }
  e1 = n.cross(helper).normalized();
  e2 = n.cross(e1);
}

void check_finite(const PointPairSet& pairs) {
  if (pairs.first.size() != pairs.second.size()) {
    throw Error(ErrorKind::kInvalidInput, "pair set sides differ in size");
  }
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    if (!pairs.first[k].allFinite() || !pairs.second[k].allFinite()) {
      throw Error(ErrorKind::kInvalidInput, "pair set has non-finite points");
    }
  }
}

double pair_set_diameter(const PointPairSet& pairs) {
  PointCloud all;
  all.reserve(2 * pairs.size());
  all.insert(all.end(), pairs.first.begin(), pairs.first.end());
  all.insert(all.end(), pairs.second.begin(), pairs.second.end());
  return diameter(all);
}

struct Seed {
  Plane plane;
};

// Candidate starting planes: the dominant pair direction, and the exact
// minimiser of the offset-eliminated objective
//   f(n) = sum |a - b|^2 + 4 n^T S n,  S = sym(sum (a - m)(b - m)^T),
// where m is the mean midpoint and d = -n^T m.
std::vector<Seed> initial_planes(const PointPairSet& pairs,
                                 double degenerate_length) {
  const std::size_t count = pairs.size();
  Vec3 mean_mid = Vec3::Zero();
  for (std::size_t k = 0; k < count; ++k) {
    mean_mid += 0.5 * (pairs.first[k] + pairs.second[k]);
  }
  mean_mid /= static_cast<double>(count);

  Mat3 directions = Mat3::Zero();
  Vec3 reference = Vec3::Zero();
  std::size_t usable = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const Vec3 delta = pairs.first[k] - pairs.second[k];
    const double len = delta.norm();
    if (len < degenerate_length) continue;
    Vec3 dir = delta / len;
    if (usable == 0) reference = dir;
    if (dir.dot(reference) < 0.0) dir = -dir;
    directions += dir * dir.transpose();
    ++usable;
  }
  if (usable == 0) {
    throw Error(ErrorKind::kDegenerateConfiguration,
                "every pair is self-symmetric; the reflection is undetermined");
  }

  std::vector<Seed> seeds;
  Eigen::SelfAdjointEigenSolver<Mat3> dir_solver(directions);
  const Vec3 n_dir = dir_solver.eigenvectors().col(2).normalized();
  seeds.push_back({{n_dir, -n_dir.dot(mean_mid)}});

  Mat3 cross = Mat3::Zero();
  for (std::size_t k = 0; k < count; ++k) {
    cross += (pairs.first[k] - mean_mid) * (pairs.second[k] - mean_mid).transpose();
  }
  const Mat3 sym = 0.5 * (cross + cross.transpose());
  Eigen::SelfAdjointEigenSolver<Mat3> cf_solver(sym);
  const Vec3 n_cf = cf_solver.eigenvectors().col(0).normalized();
  seeds.push_back({{n_cf, -n_cf.dot(mean_mid)}});
  return seeds;
}

FitReport fit_all_pairs(const PointPairSet& pairs,
                        const ReflectionFitOptions& options,
                        double degenerate_length) {
  if (pairs.size() < 3) {
    throw Error(ErrorKind::kInsufficientData,
                "reflection fit needs at least 3 pairs");
  }
  const std::vector<Seed> seeds = initial_planes(pairs, degenerate_length);

  FitReport best;
  best.objective = std::numeric_limits<double>::infinity();
  for (const Seed& seed : seeds) {
    int iterations = 0;
    const Plane refined =
        refine_reflection_plane(pairs, seed.plane, options, &iterations);
    const double value = reflection_objective(refined, pairs);
    if (value < best.objective) {
      best.plane = refined;
      best.objective = value;
      best.iterations = iterations;
    }
  }
  best.plane = canonicalize(best.plane);
  best.inlier_count = pairs.size();
  best.inliers.resize(pairs.size());
  std::iota(best.inliers.begin(), best.inliers.end(), std::size_t{0});
  best.rms_residual =
      std::sqrt(best.objective / static_cast<double>(pairs.size()));
  return best;
}

std::vector<std::size_t> inliers_within(const Plane& plane,
                                        const PointPairSet& pairs,
                                        double threshold) {
  const std::vector<double> residuals = reflection_residuals(plane, pairs);
  const double limit = threshold * threshold;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < residuals.size(); ++k) {
    if (residuals[k] <= limit) out.push_back(k);
  }
  return out;
}

FitReport fit_ransac(const PointPairSet& pairs,
                     const ReflectionFitOptions& options,
                     double scene_diameter) {
  const RansacOptions& ro = options.ransac;
  const double degenerate_length = options.degeneracy_fraction * scene_diameter;
  const double threshold = ro.inlier_threshold * scene_diameter;
  const std::size_t count = pairs.size();
  const std::size_t min_inliers = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil(ro.min_inlier_fraction * count)));

  CounterRng rng(ro.seed, 0x5241u);
  std::vector<std::size_t> best_inliers;
  double best_score = std::numeric_limits<double>::infinity();
  ReflectionFitOptions minimal = options;
  minimal.max_iterations = 10;

  for (int it = 0; it < ro.iterations; ++it) {
    std::size_t sample[3];
    sample[0] = rng.below(count);
    do sample[1] = rng.below(count); while (sample[1] == sample[0]);
    do sample[2] = rng.below(count);
    while (sample[2] == sample[0] || sample[2] == sample[1]);

    Plane hypothesis;
    try {
      hypothesis = fit_all_pairs(pairs.subset(sample), minimal, degenerate_length)
                       .plane;
    } catch (const Error&) {
      continue;
    }
    std::vector<std::size_t> inliers = inliers_within(hypothesis, pairs, threshold);
    if (inliers.size() < best_inliers.size()) continue;
    // Ties in consensus size go to the lower inlier residual.
    const double score = reflection_objective(hypothesis, pairs.subset(inliers));
    if (inliers.size() > best_inliers.size() || score < best_score) {
      best_inliers = std::move(inliers);
      best_score = score;
    }
  }
  if (best_inliers.size() < min_inliers) {
    throw Error(ErrorKind::kInsufficientData,
                "no RANSAC consensus: " + std::to_string(best_inliers.size()) +
                    " of " + std::to_string(count) + " pairs agree");
  }

  // Refit on the consensus and re-collect inliers until the set is stable.
  FitReport report =
      fit_all_pairs(pairs.subset(best_inliers), options, degenerate_length);
  for (int round = 0; round < 4; ++round) {
    std::vector<std::size_t> refreshed =
        inliers_within(report.plane, pairs, threshold);
    if (refreshed == best_inliers || refreshed.size() < min_inliers) break;
    best_inliers = std::move(refreshed);
    report = fit_all_pairs(pairs.subset(best_inliers), options, degenerate_length);
  }
  report.inliers = best_inliers;
  report.inlier_count = best_inliers.size();
  return report;
}

}  // namespace

PointPairSet PointPairSet::subset(std::span<const std::size_t> indices) const {
  PointPairSet out;
  out.first.reserve(indices.size());
  out.second.reserve(indices.size());
  for (std::size_t i : indices) out.add(first[i], second[i]);
  return out;
}

void SdfSampleSet::add(const Vec3& p, double s, double w) {
  if (weights.size() != points.size()) weights.resize(points.size(), 1.0);
  points.push_back(p);
  values.push_back(s);
  weights.push_back(w);
}

double reflection_objective(const Plane& plane, const PointPairSet& pairs) {
  const auto c = coefficients(plane);
  return kernels::active().reflection_objective(
      xyz_data(pairs.first), xyz_data(pairs.second), pairs.size(), c.data());
}

std::vector<double> reflection_residuals(const Plane& plane,
                                         const PointPairSet& pairs) {
  const auto c = coefficients(plane);
  std::vector<double> out(pairs.size());
  kernels::active().reflection_residuals(xyz_data(pairs.first),
                                         xyz_data(pairs.second), pairs.size(),
                                         c.data(), out.data());
  return out;
}

Plane refine_reflection_plane(const PointPairSet& pairs, const Plane& start,
                              const ReflectionFitOptions& options,
                              int* iterations, std::vector<double>* history) {
  Plane current{start.normal.normalized(), start.offset};
  double value = reflection_objective(current, pairs);
  if (history) history->push_back(value);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    Vec3 e1, e2;
    tangent_basis(current.normal, e1, e2);
    Eigen::Matrix<double, 3, 2> tangent;
    tangent << e1, e2;

    Mat3 jtj = Mat3::Zero();
    Vec3 jtr = Vec3::Zero();
    const Vec3& n = current.normal;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const Vec3& a = pairs.first[k];
      const Vec3& b = pairs.second[k];
      const double s = n.dot(b) + current.offset;
      const Vec3 r = a - b + 2.0 * s * n;
      // d r / d n = 2 n b^T + 2 s I ; d r / d offset = 2 n
      const Mat3 dr_dn = 2.0 * n * b.transpose() + 2.0 * s * Mat3::Identity();
      Mat3 jac;
      jac.leftCols<2>() = dr_dn * tangent;
      jac.col(2) = 2.0 * n;
      jtj += jac.transpose() * jac;
      jtr += jac.transpose() * r;
    }
    Vec3 step = jtj.ldlt().solve(-jtr);
    if (!step.allFinite()) {
      step = (jtj + 1e-9 * jtj.trace() * Mat3::Identity()).ldlt().solve(-jtr);
      if (!step.allFinite()) break;
    }

    bool accepted = false;
    double scale = 1.0;
    Plane candidate;
    double candidate_value = value;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      const Vec3 scaled = scale * step;
      candidate.normal = (n + tangent * scaled.head<2>()).normalized();
      candidate.offset = current.offset + scaled.z();
      candidate_value = reflection_objective(candidate, pairs);
      if (candidate_value <= value) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    const double step_norm = scale * step.norm();
    current = candidate;
    value = candidate_value;
    if (history) history->push_back(value);
    if (step_norm < options.step_tolerance) {
      ++it;
      break;
    }
  }
  if (iterations) *iterations = it;
  return current;
}

FitReport fit_reflection_plane(const PointPairSet& pairs,
                               const ReflectionFitOptions& options) {
  check_finite(pairs);
  if (pairs.size() < 3) {
    throw Error(ErrorKind::kInsufficientData,
                "reflection fit needs at least 3 pairs");
  }
  const double scene_diameter = pair_set_diameter(pairs);
  if (!(scene_diameter > 0.0)) {
    throw Error(ErrorKind::kDegenerateConfiguration,
                "all pair points coincide");
  }
  if (options.ransac.enabled) return fit_ransac(pairs, options, scene_diameter);
  return fit_all_pairs(pairs, options,
                       options.degeneracy_fraction * scene_diameter);
}

double sdf_objective(const Plane& plane, const SdfSampleSet& samples) {
  double sum = 0.0;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const double w = samples.weights.empty() ? 1.0 : samples.weights[k];
    const double r = signed_distance(plane, samples.points[k]) - samples.values[k];
    sum += w * r * r;
  }
  return sum;
}

FitReport fit_plane_from_sdf(const SdfSampleSet& samples) {
  const std::size_t count = samples.size();
  if (samples.values.size() != count ||
      (!samples.weights.empty() && samples.weights.size() != count)) {
    throw Error(ErrorKind::kInvalidInput, "sdf sample arrays differ in size");
  }
  if (count < 4) {
    throw Error(ErrorKind::kInsufficientData,
                "plane-from-sdf fit needs at least 4 samples");
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double w = samples.weights.empty() ? 1.0 : samples.weights[k];
    if (!samples.points[k].allFinite() || !std::isfinite(samples.values[k]) ||
        !(w > 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::kInvalidInput,
                  "sdf samples must be finite with positive weights");
    }
  }

  const auto& table = kernels::active();
  const double* w = samples.weights.empty() ? nullptr : samples.weights.data();
  const double* xyz = xyz_data(samples.points);
  const kernels::FirstMoments first =
      table.first_moments(xyz, samples.values.data(), w, count);
  const Vec3 mean_p = Vec3(first.wx, first.wy, first.wz) / first.w;
  const double mean_s = first.ws / first.w;
  const double center[4] = {mean_p.x(), mean_p.y(), mean_p.z(), mean_s};
  const kernels::SecondMoments second =
      table.second_moments(xyz, samples.values.data(), w, count, center);

  Mat3 scatter;
  scatter << second.xx, second.xy, second.xz,
             second.xy, second.yy, second.yz,
             second.xz, second.yz, second.zz;
  const Vec3 b(second.sx, second.sy, second.sz);

  Eigen::SelfAdjointEigenSolver<Mat3> solver(scatter);
  const Vec3 lambda = solver.eigenvalues();
  const Mat3 q = solver.eigenvectors();
  const double top = lambda[2];
  if (!(top > 0.0) || lambda[1] <= 1e-10 * top) {
    throw Error(ErrorKind::kDegenerateConfiguration,
                "sdf sample points are collinear or coincident");
  }
  const Vec3 beta = q.transpose() * b;

  // Eigenvalues tied with the smallest one form the group whose components
  // decide between the regular and the degenerate (b -> 0) branch.
  const double tie = 1e-12 * top;
  const double group_tol = 1e-14 * (b.norm() + top);
  double group_beta2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (lambda[i] - lambda[0] <= tie) group_beta2 += beta[i] * beta[i];
  }

  Vec3 normal;
  int iterations = 0;
  bool solved = false;
  if (std::sqrt(group_beta2) <= group_tol) {
    Vec3 partial = Vec3::Zero();
    for (int i = 0; i < 3; ++i) {
      if (lambda[i] - lambda[0] <= tie) continue;
      partial += beta[i] / (lambda[i] - lambda[0]) * q.col(i);
    }
    const double len2 = partial.squaredNorm();
    if (len2 <= 1.0) {
      normal = partial + std::sqrt(1.0 - len2) * q.col(0);
      solved = true;
    }
  }
  if (!solved) {
    // Root of 1/||x(mu)|| - 1 on (lambda_min - |b|, lambda_min), where
    // x(mu) = sum beta_i / (lambda_i - mu) q_i. The function decreases
    // monotonically across the bracket.
    const auto norm_x = [&](double mu, double* slope) {
      double n2 = 0.0, d = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double gap = lambda[i] - mu;
        n2 += beta[i] * beta[i] / (gap * gap);
        d += beta[i] * beta[i] / (gap * gap * gap);
      }
      const double nx = std::sqrt(n2);
      if (slope) *slope = d / nx;
      return nx;
    };
    double lo = lambda[0] - b.norm();
    double hi = lambda[0];
    double mu = lo;
    for (iterations = 0; iterations < 200; ++iterations) {
      double slope = 0.0;
      const double nx = norm_x(mu, &slope);
      const double g = 1.0 / nx - 1.0;
      if (!std::isfinite(g)) {
        mu = 0.5 * (lo + hi);
        continue;
      }
      if (g > 0.0) lo = mu; else hi = mu;
      if (g == 0.0) break;
      // g'(mu) = -||x||' / ||x||^2
      const double dg = -slope / (nx * nx);
      double next = mu - g / dg;
      if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
      if (std::abs(next - mu) <= 1e-15 * std::max(1.0, std::abs(mu)) ||
          hi - lo <= 1e-15 * std::max(1.0, std::abs(mu))) {
        mu = next;
        break;
      }
      mu = next;
    }
    normal = Vec3::Zero();
    for (int i = 0; i < 3; ++i) normal += beta[i] / (lambda[i] - mu) * q.col(i);
    normal.normalize();
  }

  // Signed distances fix the orientation; the objective is reported for the
  // oriented fit even when canonicalize flips the returned plane.
  const Plane oriented{normal, mean_s - normal.dot(mean_p)};
  FitReport report;
  report.plane = canonicalize(oriented);
  report.objective = sdf_objective(oriented, samples);
  report.rms_residual = std::sqrt(report.objective / first.w);
  report.inlier_count = count;
  report.iterations = iterations;
  report.inliers.resize(count);
  std::iota(report.inliers.begin(), report.inliers.end(), std::size_t{0});
  return report;
}

}  // namespace symplane
