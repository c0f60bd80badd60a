#pragma once

// Isolation forest over the rows of an Eigen matrix.
//
// Trees partition a without-replacement subsample of psi rows with splits
// drawn uniformly in dimension (among those with a non-zero range in the
// node) and uniformly in value within that range; left takes x < split.
// Growth stops at depth ceil(log2 psi) or when a node holds one row.
//
// Scores follow s(x) = 2^(-E[h(x)] / c(psi)), where h adds c(m) at a leaf
// holding m rows and c(n) = 2 H(n-1) - 2 (n-1) / n.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "wlan/rng.hpp"

namespace wlan {

inline constexpr double kEulerGamma = 0.5772156649;
/// Harmonic numbers below this index are exact sums; from here on
/// ln(i) + gamma is within 0.01 of the exact value.
inline constexpr int kExactHarmonicBelow = 50;

inline double harmonic_exact(int i) {
  double h = 0.0;
  for (int k = i; k >= 1; --k) h += 1.0 / k;
  return h;
}

inline double harmonic(int i) {
  if (i <= 0) return 0.0;
  if (i < kExactHarmonicBelow) return harmonic_exact(i);
  return std::log(static_cast<double>(i)) + kEulerGamma;
}

/// Average unsuccessful-search path length in a binary search tree of n
/// keys; c(0) = c(1) = 0 and c(2) = 1 exactly.
inline double average_path_length(std::int64_t n) {
  if (n <= 1) return 0.0;
  const auto m = static_cast<int>(n);
  return 2.0 * harmonic(m - 1) - 2.0 * static_cast<double>(m - 1) / static_cast<double>(m);
}

class TooFewPoints : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
struct IsolationTree {
  struct Node {
    int split_dim = -1;  // -1 marks a leaf
    Scalar split_value{};
    int left = -1;
    int right = -1;
    int size = 0;  // rows of the subsample that reached this node

    bool is_leaf() const { return split_dim < 0; }
    bool operator==(const Node&) const = default;
  };

  std::vector<Node> nodes;  // nodes[0] is the root

  bool operator==(const IsolationTree&) const = default;

  int depth(int node = 0) const {
    const Node& n = nodes[static_cast<std::size_t>(node)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth(n.left), depth(n.right));
  }

  template <typename Derived>
  Scalar path_length(const Eigen::MatrixBase<Derived>& x) const {
    int node = 0;
    int edges = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
      const Node& n = nodes[static_cast<std::size_t>(node)];
      node = x(n.split_dim) < n.split_value ? n.left : n.right;
      ++edges;
    }
    return static_cast<Scalar>(edges) +
           static_cast<Scalar>(average_path_length(nodes[static_cast<std::size_t>(node)].size));
  }
};

template <typename Scalar>
struct ForestModel {
  static constexpr int kFormatVersion = 1;

  std::vector<IsolationTree<Scalar>> trees;
  int n_trees = 0;
  int requested_subsample = 0;
  int subsample_size = 0;  // min(requested, rows)
  int dims = 0;
  std::uint64_t seed = 0;

  bool operator==(const ForestModel&) const = default;

  int max_depth() const {
    return static_cast<int>(std::ceil(std::log2(static_cast<double>(subsample_size))));
  }
};

namespace detail {

template <typename Scalar, typename Derived>
int grow(IsolationTree<Scalar>& tree, const Eigen::MatrixBase<Derived>& points,
         std::vector<Eigen::Index>& idx, std::size_t lo, std::size_t hi, int depth, int max_depth,
         Rng& rng) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  tree.nodes.back().size = static_cast<int>(hi - lo);
  if (hi - lo <= 1 || depth >= max_depth) return id;

  const auto dims = points.cols();
  std::vector<int> candidates;
  std::vector<Scalar> mins(static_cast<std::size_t>(dims)), maxs(static_cast<std::size_t>(dims));
  for (Eigen::Index d = 0; d < dims; ++d) {
    Scalar mn = points(idx[lo], d);
    Scalar mx = mn;
    for (std::size_t i = lo + 1; i < hi; ++i) {
      const Scalar v = points(idx[i], d);
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    mins[static_cast<std::size_t>(d)] = mn;
    maxs[static_cast<std::size_t>(d)] = mx;
    if (mx > mn) candidates.push_back(static_cast<int>(d));
  }
  if (candidates.empty()) return id;

  const int dim = candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  const Scalar mn = mins[static_cast<std::size_t>(dim)];
  const Scalar mx = maxs[static_cast<std::size_t>(dim)];
  Scalar split = mn + static_cast<Scalar>(rng.uniform()) * (mx - mn);
  if (split >= mx) split = mn;  // rounding guard keeps split in [min, max)

  const auto mid = static_cast<std::size_t>(
      std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                            idx.begin() + static_cast<std::ptrdiff_t>(hi),
                            [&](Eigen::Index r) { return points(r, dim) < split; }) -
      idx.begin());

  const int left = grow(tree, points, idx, lo, mid, depth + 1, max_depth, rng);
  const int right = grow(tree, points, idx, mid, hi, depth + 1, max_depth, rng);
  auto& node = tree.nodes[static_cast<std::size_t>(id)];
  node.split_dim = dim;
  node.split_value = split;
  node.left = left;
  node.right = right;
  return id;
}

}  // namespace detail

/// Fits a forest on the rows of `points`. Tree t draws from its own RNG
/// stream derived from (seed, t), so trees are independent of build order.
template <typename Derived>
ForestModel<typename Derived::Scalar> fit_isolation_forest(const Eigen::MatrixBase<Derived>& points,
                                                           int n_trees, int subsample,
                                                           std::uint64_t seed) {
  using Scalar = typename Derived::Scalar;
  if (points.rows() < 2) throw TooFewPoints("isolation forest needs at least 2 points");
  if (subsample < 2) throw std::invalid_argument("subsample size must be >= 2");
  if (n_trees < 1) throw std::invalid_argument("n_trees must be >= 1");

  ForestModel<Scalar> model;
  model.n_trees = n_trees;
  model.requested_subsample = subsample;
  model.subsample_size = static_cast<int>(std::min<Eigen::Index>(subsample, points.rows()));
  model.dims = static_cast<int>(points.cols());
  model.seed = seed;
  model.trees.resize(static_cast<std::size_t>(n_trees));

  const auto n = static_cast<std::size_t>(points.rows());
  const auto m = static_cast<std::size_t>(model.subsample_size);
  const int max_depth = model.max_depth();
  for (int t = 0; t < n_trees; ++t) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(t)));
    std::vector<Eigen::Index> idx(n);
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(n - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    detail::grow(model.trees[static_cast<std::size_t>(t)], points, idx, 0, m, 0, max_depth, rng);
  }
  return model;
}

template <typename Scalar, typename Derived>
Scalar mean_path_length(const ForestModel<Scalar>& model, const Eigen::MatrixBase<Derived>& point) {
  Scalar total = 0;
  for (const auto& tree : model.trees) total += tree.path_length(point);
  return total / static_cast<Scalar>(model.trees.size());
}

/// Score from a mean path length for a forest fitted with `subsample` rows.
template <typename Scalar>
Scalar score_from_path_length(Scalar mean_path, int subsample) {
  const double c = average_path_length(subsample);
  return static_cast<Scalar>(std::pow(2.0, -static_cast<double>(mean_path) / c));
}

/// Anomaly score in (0, 1]; higher is more isolated.
template <typename Scalar, typename Derived>
Scalar iforest_score(const ForestModel<Scalar>& model, const Eigen::MatrixBase<Derived>& point) {
  return score_from_path_length(mean_path_length(model, point), model.subsample_size);
}

/// Scores every row of `points`.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> iforest_scores(const ForestModel<Scalar>& model,
                                                        const Eigen::MatrixBase<Derived>& points) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(points.rows());
  for (Eigen::Index r = 0; r < points.rows(); ++r) out(r) = iforest_score(model, points.row(r));
  return out;
}

}  // namespace wlan
