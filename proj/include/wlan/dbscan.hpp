#pragma once

#include <deque>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace wlan {

inline constexpr int kNoise = -1;

/// Indices of rows within Euclidean distance `eps` of row `i`, itself
/// included, in ascending order.
template <typename Derived>
std::vector<Eigen::Index> region_query(const Eigen::MatrixBase<Derived>& points, Eigen::Index i,
                                       typename Derived::Scalar eps) {
  std::vector<Eigen::Index> out;
  const auto eps2 = eps * eps;
  for (Eigen::Index j = 0; j < points.rows(); ++j) {
    if ((points.row(j) - points.row(i)).squaredNorm() <= eps2) out.push_back(j);
  }
  return out;
}

/// Density clustering of the rows of `points`. Returns a cluster id per row
/// (0, 1, ... in order of discovery) or kNoise. A row is core when at least
/// `min_pts` rows, itself included, lie within `eps`. Rows are visited in
/// input order and each cluster is expanded completely before the next is
/// started, so a border row reachable from several clusters joins the one
/// whose lowest-index core row comes first.
template <typename Derived>
std::vector<int> dbscan(const Eigen::MatrixBase<Derived>& points, typename Derived::Scalar eps,
                        int min_pts) {
  if (!(eps > 0)) throw std::invalid_argument("dbscan eps must be > 0");
  if (min_pts < 1) throw std::invalid_argument("dbscan min_pts must be >= 1");

  constexpr int kUnvisited = -2;
  const auto n = points.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), kUnvisited);
  int cluster = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[static_cast<std::size_t>(i)] != kUnvisited) continue;
    const auto seeds = region_query(points, i, eps);
    if (static_cast<int>(seeds.size()) < min_pts) {
      labels[static_cast<std::size_t>(i)] = kNoise;
      continue;
    }
    labels[static_cast<std::size_t>(i)] = cluster;
    std::deque<Eigen::Index> queue(seeds.begin(), seeds.end());
    while (!queue.empty()) {
      const auto q = queue.front();
      queue.pop_front();
      int& label = labels[static_cast<std::size_t>(q)];
      if (label == kNoise) label = cluster;  // border row
      if (label != kUnvisited) continue;
      label = cluster;
      const auto neighbours = region_query(points, q, eps);
      if (static_cast<int>(neighbours.size()) >= min_pts) {
        queue.insert(queue.end(), neighbours.begin(), neighbours.end());
      }
    }
    ++cluster;
  }
  return labels;
}

}  // namespace wlan
