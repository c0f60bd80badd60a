#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>

#include "wlan/dbscan.hpp"

using namespace wlan;

namespace {

// Reference clustering: core rows joined by union-find over the eps graph,
// clusters numbered by their lowest core index, each border row given to the
// cluster of lowest number among its core neighbours.
std::vector<int> oracle(const Eigen::MatrixXd& p, double eps, int min_pts) {
  const int n = static_cast<int>(p.rows());
  auto near = [&](int i, int j) { return (p.row(i) - p.row(j)).norm() <= eps; };
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (int j = 0; j < n; ++j) k += near(i, j);
    core[i] = k >= min_pts;
  }
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (core[i] && core[j] && near(i, j)) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));
  std::map<int, int> number;  // root (lowest index) -> cluster id
  for (int i = 0; i < n; ++i)
    if (core[i] && !number.count(find(i))) number.emplace(find(i), static_cast<int>(number.size()));
  std::vector<int> out(n, kNoise);
  for (int i = 0; i < n; ++i) {
    if (core[i]) {
      out[i] = number[find(i)];
      continue;
    }
    for (int j = 0; j < n; ++j) {
      if (core[j] && near(i, j)) {
        const int id = number[find(j)];
        if (out[i] == kNoise || id < out[i]) out[i] = id;
      }
    }
  }
  return out;
}

// Partition equality up to relabelling, noise kept as noise.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] == kNoise) != (b[i] == kNoise)) return false;
    if (a[i] == kNoise) continue;
    if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
    if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
  }
  return true;
}

Eigen::MatrixXd blobs(int n, int d, std::mt19937& gen) {
  std::normal_distribution<> nd;
  std::uniform_int_distribution<> centre(0, 3);
  Eigen::MatrixXd m(n, d);
  for (int r = 0; r < n; ++r) {
    const int c = centre(gen);
    for (int k = 0; k < d; ++k) m(r, k) = 3.0 * c + nd(gen) * 0.6;
  }
  return m;
}

}  // namespace

TEST(Dbscan, MinPtsOneMakesEveryRowCore) {
  Eigen::MatrixXd p(4, 1);
  p << 0, 0.5, 10, 10.4;
  EXPECT_EQ(dbscan(p, 1.0, 1), (std::vector<int>{0, 0, 1, 1}));
}

TEST(Dbscan, MinPtsAboveRowCountIsAllNoise) {
  Eigen::MatrixXd p(3, 2);
  p << 0, 0, 0, 0, 0, 0;
  EXPECT_EQ(dbscan(p, 1.0, 4), (std::vector<int>(3, kNoise)));
}

TEST(Dbscan, EpsIsInclusive) {
  Eigen::MatrixXd p(2, 1);
  p << 0, 1;
  EXPECT_EQ(dbscan(p, 1.0, 2), (std::vector<int>{0, 0}));
}

TEST(Dbscan, BorderJoinsFirstCluster) {
  // Row 4 lies within eps of a core row of each group but is not core.
  Eigen::MatrixXd p(9, 1);
  p << 0, 0.1, 0.2, 0.3, 1.0, 1.7, 1.8, 1.9, 2.0;
  EXPECT_EQ(dbscan(p, 0.7 + 1e-9, 4), (std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1}));
}

TEST(Dbscan, Errors) {
  Eigen::MatrixXd p(1, 1);
  p << 0;
  EXPECT_THROW(dbscan(p, 0.0, 2), std::invalid_argument);
  EXPECT_THROW(dbscan(p, 1.0, 0), std::invalid_argument);
}

TEST(Dbscan, MatchesReferenceClustering) {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 60);
    const int d = 1 + static_cast<int>(gen() % 4);
    const auto p = blobs(n, d, gen);
    const double eps = 0.3 + 1.5 * std::uniform_real_distribution<>(0, 1)(gen);
    const int min_pts = 1 + static_cast<int>(gen() % 6);
    ASSERT_EQ(dbscan(p, eps, min_pts), oracle(p, eps, min_pts)) << "trial " << trial;
  }
}

TEST(Dbscan, CorePartitionInvariantUnderPermutation) {
  std::mt19937 gen(99);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 10 + static_cast<int>(gen() % 50);
    const auto p = blobs(n, 2, gen);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), gen);
    Eigen::MatrixXd q(n, 2);
    for (int i = 0; i < n; ++i) q.row(i) = p.row(perm[i]);
    const auto a = dbscan(p, 0.8, 4);
    const auto b = dbscan(q, 0.8, 4);
    // Noise and core membership are order-free; compare on core rows only.
    std::vector<int> ca, cb;
    for (int i = 0; i < n; ++i) {
      const auto nb = region_query(p, perm[i], 0.8);
      if (static_cast<int>(nb.size()) < 4) {
        EXPECT_EQ(a[perm[i]] == kNoise, b[i] == kNoise);
        continue;
      }
      ca.push_back(a[perm[i]]);
      cb.push_back(b[i]);
    }
    EXPECT_TRUE(same_partition(ca, cb));
  }
}

TEST(Dbscan, ScalingPointsAndEpsTogether) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = blobs(40, 3, gen);
    // Powers of two keep the distance comparisons exact.
    EXPECT_EQ(dbscan(p, 0.75, 3), dbscan(Eigen::MatrixXd(p * 4.0), 3.0, 3));
  }
}
