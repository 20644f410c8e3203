#include "symplane/align.hpp"

#include "symplane/error.hpp"

#include <Eigen/Dense>

namespace symplane {

SimilarityTransform SimilarityTransform::compose(
    const SimilarityTransform& other) const {
  return {scale * other.scale, rotation * other.rotation,
          scale * (rotation * other.translation) + translation};
}

SimilarityTransform SimilarityTransform::inverse() const {
  const Mat3 rt = rotation.transpose();
  return {1.0 / scale, rt, -(rt * translation) / scale};
}

SimilarityTransform estimate_similarity(std::span<const Vec3> source,
                                        std::span<const Vec3> target) {
  if (source.size() != target.size()) {
    throw Error(ErrorKind::kInvalidInput,
                "similarity estimation needs equally sized point sets");
  }
  if (source.size() < 3) {
    throw Error(ErrorKind::kInsufficientData,
                "similarity estimation needs at least 3 correspondences");
  }
  const double count = static_cast<double>(source.size());
  Vec3 mean_src = Vec3::Zero(), mean_dst = Vec3::Zero();
  for (std::size_t k = 0; k < source.size(); ++k) {
    mean_src += source[k];
    mean_dst += target[k];
  }
  mean_src /= count;
  mean_dst /= count;

  Mat3 cov = Mat3::Zero();
  Mat3 src_scatter = Mat3::Zero();
  double src_var = 0.0;
  for (std::size_t k = 0; k < source.size(); ++k) {
    const Vec3 a = source[k] - mean_src;
    const Vec3 b = target[k] - mean_dst;
    cov += b * a.transpose();
    src_scatter += a * a.transpose();
    src_var += a.squaredNorm();
  }
  cov /= count;
  src_var /= count;

  Eigen::SelfAdjointEigenSolver<Mat3> scatter_eig(src_scatter);
  const Vec3 ev = scatter_eig.eigenvalues();
  if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2]) {
    throw Error(ErrorKind::kDegenerateConfiguration,
                "source points are collinear or coincident");
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 sign = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) {
    sign(2, 2) = -1.0;
  }
  SimilarityTransform out;
  out.rotation = svd.matrixU() * sign * svd.matrixV().transpose();
  out.scale = (svd.singularValues().asDiagonal() * sign).trace() / src_var;
  out.translation = mean_dst - out.scale * (out.rotation * mean_src);
  return out;
}

SimilarityTransform estimate_similarity(const PointMap& source,
                                        const PointMap& target) {
  if (source.width() != target.width() || source.height() != target.height()) {
    throw Error(ErrorKind::kInvalidInput, "point maps differ in size");
  }
  PointCloud src, dst;
  for (std::size_t i = 0; i < source.points.size(); ++i) {
    if (source.valid.data()[i] && target.valid.data()[i]) {
      src.push_back(source.points.data()[i]);
      dst.push_back(target.points.data()[i]);
    }
  }
  return estimate_similarity(src, dst);
}

double alignment_residual(const SimilarityTransform& transform,
                          std::span<const Vec3> source,
                          std::span<const Vec3> target) {
  double sum = 0.0;
  for (std::size_t k = 0; k < source.size(); ++k) {
    sum += (transform.apply(source[k]) - target[k]).squaredNorm();
  }
  return sum;
}

Plane transform_plane(const SimilarityTransform& transform, const Plane& plane) {
  validate_plane(plane);
  const Vec3 n = transform.rotation * plane.normal;
  return canonicalize(
      Plane{n, transform.scale * plane.offset - n.dot(transform.translation)});
}

}  // namespace symplane
