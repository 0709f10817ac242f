#ifndef TABML_UNSUPERVISED_CLUSTER_HPP_
#define TABML_UNSUPERVISED_CLUSTER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tabml/core/matrix.hpp"

namespace tabml::unsupervised {

enum class ClusterAlgorithm { kKmeans, kDbscan, kAgglomerative, kGmm };
enum class Linkage { kSingle, kComplete, kAverage };

std::string_view ClusterAlgorithmName(ClusterAlgorithm algorithm);
std::optional<ClusterAlgorithm> ParseClusterAlgorithm(std::string_view name);
std::string_view LinkageName(Linkage linkage);
std::optional<Linkage> ParseLinkage(std::string_view name);

struct ClusterSpec {
  ClusterAlgorithm algorithm = ClusterAlgorithm::kKmeans;
  std::size_t k = 2;
  double eps = 0.5;
  std::size_t min_pts = 5;
  Linkage linkage = Linkage::kAverage;
  std::uint64_t seed = 0;
};

// One agglomeration step. Clusters 0..n-1 are the rows; step s creates n+s.
struct Merge {
  std::size_t a = 0;
  std::size_t b = 0;
  double distance = 0.0;
  std::size_t size = 0;
};

struct GaussianComponent {
  double weight = 0.0;
  Vector mean;
  Matrix covariance;
};

struct ClusterResult {
  std::vector<int> labels;  // -1 marks dbscan noise
  std::size_t n_clusters = 0;
  Matrix centroids;         // n_clusters x n_features (kmeans, gmm)
  std::size_t n_iterations = 0;
  bool converged = true;
  Vector inertia_trace;         // kmeans: inertia after every assignment
  Vector log_likelihood_trace;  // gmm: total log-likelihood per E-step
  std::vector<GaussianComponent> components;
  Matrix responsibilities;      // gmm: n_rows x k
  std::vector<Merge> dendrogram;

  double inertia() const { return inertia_trace.empty() ? 0.0 : inertia_trace.back(); }
};

ClusterResult KMeans(const Matrix& x, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations = 300);

// Neighborhoods use distance <= eps and include the point itself.
ClusterResult Dbscan(const Matrix& x, double eps, std::size_t min_pts);

ClusterResult Agglomerative(const Matrix& x, std::size_t k, Linkage linkage);

ClusterResult Gmm(const Matrix& x, std::size_t k, std::uint64_t seed,
                  std::size_t max_iterations = 200, double tolerance = 1e-4,
                  double ridge = 1e-6);

ClusterResult Cluster(const Matrix& x, const ClusterSpec& spec);

// Mean silhouette over non-noise rows; nullopt when fewer than two clusters
// (or fewer than two clustered rows) make it undefined.
std::optional<double> Silhouette(const Matrix& x, std::span<const int> labels);

// Default dbscan radius: the 0.9 quantile of each row's distance to its
// min_pts-th nearest neighbor (self included).
double DbscanEpsHeuristic(const Matrix& x, std::size_t min_pts);

nlohmann::json ToJson(const ClusterResult& result);

}  // namespace tabml::unsupervised

#endif  // TABML_UNSUPERVISED_CLUSTER_HPP_
