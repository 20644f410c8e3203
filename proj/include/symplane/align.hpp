#pragma once

#include "symplane/geometry.hpp"

namespace symplane {

/// x -> scale * rotation * x + translation
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return scale * (rotation * x) + translation; }

  /// (this o other)(x) = this(other(x))
  SimilarityTransform compose(const SimilarityTransform& other) const;
  SimilarityTransform inverse() const;
};

/// Closed-form least-squares similarity mapping source[k] onto target[k]
/// (cross-covariance SVD with reflection guard and optimal scale).
SimilarityTransform estimate_similarity(std::span<const Vec3> source,
                                        std::span<const Vec3> target);

/// Same, over the pixels valid in both point maps.
SimilarityTransform estimate_similarity(const PointMap& source,
                                        const PointMap& target);

/// sum_k || T(source_k) - target_k ||^2
double alignment_residual(const SimilarityTransform& transform,
                          std::span<const Vec3> source,
                          std::span<const Vec3> target);

/// Image of a plane under T, canonicalized: n' = R n, d' = s d - n'^T t.
Plane transform_plane(const SimilarityTransform& transform, const Plane& plane);

}  // namespace symplane
