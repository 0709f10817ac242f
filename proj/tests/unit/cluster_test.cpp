#include "tabml/unsupervised/cluster.hpp"

#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "tabml/core/error.hpp"
#include "test_util.hpp"

namespace tabml::unsupervised {
namespace {

Matrix Points1d(Vector v) { return Matrix::Column(v); }

// Partition as a set of row sets, independent of label values.
std::set<std::set<std::size_t>> Partition(const std::vector<int>& labels) {
  std::map<int, std::set<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].insert(i);
  std::set<std::set<std::size_t>> out;
  for (auto& [l, g] : groups) out.insert(g);
  return out;
}

TEST(KMeans, SeparatedPairs) {
  ClusterResult r = KMeans(Points1d({0, 0.1, 10, 10.1}), 2, 1);
  EXPECT_EQ(r.labels[0], r.labels[1]);
  EXPECT_EQ(r.labels[2], r.labels[3]);
  EXPECT_NE(r.labels[0], r.labels[2]);
  EXPECT_NEAR(r.centroids(static_cast<std::size_t>(r.labels[0]), 0), 0.05, 1e-12);
  EXPECT_NEAR(r.centroids(static_cast<std::size_t>(r.labels[2]), 0), 10.05, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(KMeans, OneClusterIsColumnMeans) {
  Matrix x = testing::RandomMatrix(20, 3, 2);
  ClusterResult r = KMeans(x, 1, 0);
  Vector means = ColumnMeans(x);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(r.centroids(0, j), means[j], 1e-12);
  for (int l : r.labels) EXPECT_EQ(l, 0);
}

TEST(KMeans, KEqualsRowsHasZeroInertia) {
  Matrix x = testing::RandomMatrix(6, 2, 3);
  ClusterResult r = KMeans(x, 6, 0);
  EXPECT_EQ(r.n_clusters, 6u);
  EXPECT_EQ(r.inertia(), 0.0);
}

TEST(KMeans, InertiaNonIncreasing) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto [x, y] = testing::Blobs({{0, 0}, {2, 2}, {0, 3}, {3, 0}}, 25, 1.2, seed);
    ClusterResult r = KMeans(x, 5, seed);
    for (std::size_t i = 1; i < r.inertia_trace.size(); ++i) {
      EXPECT_LE(r.inertia_trace[i], r.inertia_trace[i - 1] + 1e-12);
    }
  }
}

TEST(KMeans, KExceedsRows) {
  try {
    KMeans(Points1d({1, 2}), 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kKExceedsRows);
  }
}

TEST(Dbscan, HandTrace) {
  ClusterResult r = Dbscan(Points1d({0, 0.1, 0.2, 10}), 0.5, 2);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0, -1}));
  EXPECT_EQ(r.n_clusters, 1u);
}

TEST(Dbscan, HugeEpsAndTooManyPoints) {
  Matrix x = testing::RandomMatrix(12, 2, 4);
  ClusterResult all = Dbscan(x, 1e6, 3);
  for (int l : all.labels) EXPECT_EQ(l, 0);
  ClusterResult none = Dbscan(x, 1e6, 13);
  for (int l : none.labels) EXPECT_EQ(l, -1);
}

TEST(Dbscan, InclusiveRadius) {
  EXPECT_EQ(Dbscan(Points1d({0, 1}), 1.0, 2).labels, (std::vector<int>{0, 0}));
}

TEST(Dbscan, PermutationInvariantPartition) {
  // Well separated groups make border assignment unambiguous.
  auto [x, y] = testing::Blobs({{0, 0}, {6, 6}, {0, 6}}, 15, 0.5, 5);
  x.append_row(Vector{20, 20});
  ClusterResult a = Dbscan(x, 1.0, 4);
  std::vector<std::size_t> perm(x.rows());
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(1);
  rng.shuffle(perm);
  ClusterResult b = Dbscan(x.select_rows(perm), 1.0, 4);
  std::vector<int> back(x.rows());
  for (std::size_t i = 0; i < perm.size(); ++i) back[perm[i]] = b.labels[i];
  EXPECT_EQ(Partition(a.labels), Partition(back));
  EXPECT_EQ(a.labels.back(), -1);
}

TEST(Agglomerative, SingleLinkageNearestPair) {
  ClusterResult r = Agglomerative(Points1d({0, 1, 10}), 2, Linkage::kSingle);
  EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(r.dendrogram.front().a, 0u);
  EXPECT_EQ(r.dendrogram.front().b, 1u);
  EXPECT_EQ(r.dendrogram.size(), 2u);
}

TEST(Agglomerative, KEqualsRowsAndOne) {
  Matrix x = testing::RandomMatrix(7, 2, 6);
  for (auto l : {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
    ClusterResult singletons = Agglomerative(x, 7, l);
    EXPECT_EQ(singletons.n_clusters, 7u);
    ClusterResult one = Agglomerative(x, 1, l);
    for (int v : one.labels) EXPECT_EQ(v, 0);
  }
}

TEST(Agglomerative, LinkagesAgreeOnSeparatedPairs) {
  Matrix x{{0, 0}, {0.1, 0}, {50, 50}, {50.1, 50}};
  auto single = Agglomerative(x, 2, Linkage::kSingle);
  auto complete = Agglomerative(x, 2, Linkage::kComplete);
  EXPECT_EQ(single.labels, complete.labels);
  EXPECT_EQ(single.labels, (std::vector<int>{0, 0, 1, 1}));
}

// Oracle: recompute every inter-cluster distance from the raw points.
std::vector<std::pair<std::set<std::size_t>, std::set<std::size_t>>> NaiveMerges(
    const Matrix& x, Linkage linkage) {
  std::vector<std::set<std::size_t>> clusters;
  for (std::size_t i = 0; i < x.rows(); ++i) clusters.push_back({i});
  std::vector<std::pair<std::set<std::size_t>, std::set<std::size_t>>> merges;
  while (clusters.size() > 1) {
    double best = 1e300;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double lo = 1e300, hi = 0.0, sum = 0.0;
        for (auto a : clusters[i]) {
          for (auto b : clusters[j]) {
            const double d = std::sqrt(SquaredDistance(x.row(a), x.row(b)));
            lo = std::min(lo, d);
            hi = std::max(hi, d);
            sum += d;
          }
        }
        const double v = linkage == Linkage::kSingle     ? lo
                         : linkage == Linkage::kComplete ? hi
                                                         : sum / (clusters[i].size() * clusters[j].size());
        if (v < best - 1e-12) {
          best = v;
          bi = i;
          bj = j;
        }
      }
    }
    merges.emplace_back(clusters[bi], clusters[bj]);
    clusters[bi].insert(clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bj));
  }
  return merges;
}

TEST(Agglomerative, MatchesNaiveRecomputation) {
  Matrix x = testing::RandomMatrix(14, 2, 10);
  for (auto l : {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
    ClusterResult r = Agglomerative(x, 1, l);
    auto naive = NaiveMerges(x, l);
    // Members of each dendrogram node.
    std::vector<std::set<std::size_t>> members;
    for (std::size_t i = 0; i < x.rows(); ++i) members.push_back({i});
    for (std::size_t s = 0; s < r.dendrogram.size(); ++s) {
      const auto& m = r.dendrogram[s];
      std::set<std::size_t> a = members[m.a], b = members[m.b];
      EXPECT_TRUE((a == naive[s].first && b == naive[s].second) ||
                  (a == naive[s].second && b == naive[s].first))
          << LinkageName(l) << " step " << s;
      a.insert(b.begin(), b.end());
      EXPECT_EQ(m.size, a.size());
      members.push_back(a);
    }
  }
}

TEST(Gmm, SeparatedBlobsResponsibilities) {
  auto [x, y] = testing::Blobs({{0, 0}, {20, 20}}, 30, 0.5, 11);
  ClusterResult r = Gmm(x, 2, 3);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    EXPECT_EQ(r.labels[i], r.labels[y[i] == 0 ? 0 : 30]);
    EXPECT_GE(r.responsibilities(i, static_cast<std::size_t>(r.labels[i])), 0.999);
  }
}

TEST(Gmm, SingleComponentIsSampleMoments) {
  Matrix x = testing::RandomMatrix(40, 2, 12);
  ClusterResult r = Gmm(x, 1, 0);
  Vector mean = ColumnMeans(x);
  for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(r.components[0].mean[j], mean[j], 1e-12);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      double c = 0.0;
      for (std::size_t r2 = 0; r2 < 40; ++r2) c += (x(r2, i) - mean[i]) * (x(r2, j) - mean[j]);
      c /= 40.0;
      if (i == j) c += 1e-6;
      EXPECT_NEAR(r.components[0].covariance(i, j), c, 1e-12);
    }
  }
}

TEST(Gmm, LogLikelihoodNonDecreasing) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    auto [x, y] = testing::Blobs({{0, 0}, {2, 1}, {0, 3}}, 30, 1.0, 100 + seed);
    ClusterResult r = Gmm(x, 3, seed);
    for (std::size_t i = 1; i < r.log_likelihood_trace.size(); ++i) {
      EXPECT_GE(r.log_likelihood_trace[i], r.log_likelihood_trace[i - 1] - 1e-8)
          << "seed " << seed << " iteration " << i;
    }
  }
}

TEST(Silhouette, HandComputed) {
  Matrix x = Points1d({0, 1, 10, 11});
  std::vector<int> labels = {0, 0, 1, 1};
  // Rows 0 and 3: a=1, b=10.5; rows 1 and 2: a=1, b=9.5.
  const double expected = ((9.5 / 10.5) + (8.5 / 9.5)) / 2.0;
  EXPECT_NEAR(*Silhouette(x, labels), expected, 1e-12);
  EXPECT_FALSE(Silhouette(x, std::vector<int>{0, 0, 0, 0}));
  EXPECT_FALSE(Silhouette(x, std::vector<int>{0, -1, -1, -1}));
}

TEST(DbscanEps, PositiveAndScaleAware) {
  Matrix x = testing::RandomMatrix(30, 2, 13);
  const double e = DbscanEpsHeuristic(x, 5);
  Matrix scaled = x;
  for (std::size_t r = 0; r < 30; ++r) {
    for (std::size_t c = 0; c < 2; ++c) scaled(r, c) *= 10.0;
  }
  EXPECT_GT(e, 0.0);
  EXPECT_NEAR(DbscanEpsHeuristic(scaled, 5), 10.0 * e, 1e-9);
}

}  // namespace
}  // namespace tabml::unsupervised
