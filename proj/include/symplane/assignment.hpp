#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

namespace symplane {

using CostMatrix = Eigen::MatrixXd;

struct AssignmentPair {
  std::size_t row = 0;  // prediction
  std::size_t col = 0;  // ground truth
  double cost = 0.0;
};

struct Assignment {
  /// Sorted by row.
  std::vector<AssignmentPair> pairs;
  std::vector<std::size_t> unmatched_rows;
  std::vector<std::size_t> unmatched_cols;

  double total_cost() const;
};

/// Minimum-cost one-to-one assignment of min(rows, cols) pairs
/// (Hungarian method with potentials, O(n^2 m)).
Assignment assign(const CostMatrix& costs);

/// Mean cost over the matched pairs.
double mean_matched_loss(const CostMatrix& costs, const Assignment& assignment);

}  // namespace symplane
