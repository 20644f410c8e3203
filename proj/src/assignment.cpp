#include "symplane/assignment.hpp"

#include "symplane/error.hpp"

#include <algorithm>
#include <limits>

namespace symplane {

double Assignment::total_cost() const {
  double sum = 0.0;
  for (const AssignmentPair& p : pairs) sum += p.cost;
  return sum;
}

Assignment assign(const CostMatrix& costs) {
  Assignment out;
  const std::size_t rows = static_cast<std::size_t>(costs.rows());
  const std::size_t cols = static_cast<std::size_t>(costs.cols());
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) out.unmatched_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) out.unmatched_cols.push_back(c);
    return out;
  }
  if (!costs.allFinite()) {
    throw Error(ErrorKind::kInvalidInput, "assignment costs must be finite");
  }

  // Work on an n x m problem with n <= m.
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  auto cost = [&](std::size_t i, std::size_t j) {
    return transposed ? costs(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i))
                      : costs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> min_slack(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_slack[j]) {
          min_slack[j] = cur;
          way[j] = j0;
        }
        if (min_slack[j] < delta) {
          delta = min_slack[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_slack[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] == 0) continue;
    std::size_t r = owner[j] - 1, c = j - 1;
    if (transposed) std::swap(r, c);
    out.pairs.push_back({r, c, costs(static_cast<Eigen::Index>(r),
                                     static_cast<Eigen::Index>(c))});
    row_used[r] = 1;
    col_used[c] = 1;
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const AssignmentPair& a, const AssignmentPair& b) {
              return a.row < b.row;
            });
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_used[r]) out.unmatched_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) out.unmatched_cols.push_back(c);
  }
  return out;
}

double mean_matched_loss(const CostMatrix& costs, const Assignment& assignment) {
  if (assignment.pairs.empty()) {
    throw Error(ErrorKind::kUndefinedMetric, "mean loss over an empty matching");
  }
  double sum = 0.0;
  for (const AssignmentPair& p : assignment.pairs) {
    if (p.row >= static_cast<std::size_t>(costs.rows()) ||
        p.col >= static_cast<std::size_t>(costs.cols())) {
      throw Error(ErrorKind::kInvalidInput, "assignment does not fit the matrix");
    }
    sum += costs(static_cast<Eigen::Index>(p.row), static_cast<Eigen::Index>(p.col));
  }
  return sum / static_cast<double>(assignment.pairs.size());
}

}  // namespace symplane
