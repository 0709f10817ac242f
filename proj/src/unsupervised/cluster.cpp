#include "tabml/unsupervised/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "tabml/core/deadline.hpp"
#include "tabml/core/error.hpp"
#include "tabml/core/random.hpp"
#include "tabml/preprocess/scaler.hpp"

namespace tabml::unsupervised {

std::string_view ClusterAlgorithmName(ClusterAlgorithm algorithm) {
  switch (algorithm) {
    case ClusterAlgorithm::kKmeans: return "kmeans";
    case ClusterAlgorithm::kDbscan: return "dbscan";
    case ClusterAlgorithm::kAgglomerative: return "agglomerative";
    case ClusterAlgorithm::kGmm: return "gmm";
  }
  return "unknown";
}

std::optional<ClusterAlgorithm> ParseClusterAlgorithm(std::string_view name) {
  for (auto a : {ClusterAlgorithm::kKmeans, ClusterAlgorithm::kDbscan,
                 ClusterAlgorithm::kAgglomerative, ClusterAlgorithm::kGmm}) {
    if (ClusterAlgorithmName(a) == name) return a;
  }
  return std::nullopt;
}

std::string_view LinkageName(Linkage linkage) {
  switch (linkage) {
    case Linkage::kSingle: return "single";
    case Linkage::kComplete: return "complete";
    case Linkage::kAverage: return "average";
  }
  return "unknown";
}

std::optional<Linkage> ParseLinkage(std::string_view name) {
  for (auto l : {Linkage::kSingle, Linkage::kComplete, Linkage::kAverage}) {
    if (LinkageName(l) == name) return l;
  }
  return std::nullopt;
}

namespace {

void RequireRows(const Matrix& x, std::size_t k) {
  Require(x.rows() > 0 && x.cols() > 0, ErrorCode::kEmptyMatrix, "clustering needs data");
  Require(k >= 1, ErrorCode::kInvalidHyperparameter, "k must be at least 1");
  Require(k <= x.rows(), ErrorCode::kKExceedsRows,
          "k=" + std::to_string(k) + " exceeds the " + std::to_string(x.rows()) + " rows");
}

// Nearest center per row (first on ties) and the total squared distance.
double Assign(const Matrix& x, const Matrix& centers, std::vector<int>& labels) {
  double inertia = 0.0;
  labels.resize(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = SquaredDistance(x.row(r), centers.row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    labels[r] = arg;
    inertia += best;
  }
  return inertia;
}

Matrix KMeansPlusPlus(const Matrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  Matrix centers(k, x.cols());
  std::size_t first = rng.index(n);
  std::copy(x.row(first).begin(), x.row(first).end(), centers.row(0).begin());
  Vector d2(n);
  for (std::size_t r = 0; r < n; ++r) d2[r] = SquaredDistance(x.row(r), centers.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = n;
      for (std::size_t r = 0; r < n; ++r) {
        if (d2[r] <= 0.0) continue;
        acc += d2[r];
        pick = r;
        if (acc > u) break;
      }
    } else {
      pick = rng.index(n);
    }
    std::copy(x.row(pick).begin(), x.row(pick).end(), centers.row(c).begin());
    for (std::size_t r = 0; r < n; ++r) {
      d2[r] = std::min(d2[r], SquaredDistance(x.row(r), centers.row(c)));
    }
  }
  return centers;
}

// Renumbers labels >= 0 to 0..m-1 in order of first appearance.
std::size_t CompactLabels(std::vector<int>& labels) {
  std::vector<int> map;
  int next = 0;
  for (int& l : labels) {
    if (l < 0) continue;
    if (static_cast<std::size_t>(l) >= map.size()) map.resize(static_cast<std::size_t>(l) + 1, -1);
    int& m = map[static_cast<std::size_t>(l)];
    if (m < 0) m = next++;
    l = m;
  }
  return static_cast<std::size_t>(next);
}

}  // namespace

ClusterResult KMeans(const Matrix& x, std::size_t k, std::uint64_t seed,
                     std::size_t max_iterations) {
  RequireRows(x, k);
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  Rng rng(seed);
  ClusterResult out;
  Matrix centers = KMeansPlusPlus(x, k, rng);
  std::vector<int> labels;
  out.inertia_trace.push_back(Assign(x, centers, labels));
  out.converged = false;

  std::vector<int> next;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    CheckDeadline();
    // Empty clusters claim the row farthest from its current center.
    std::vector<std::size_t> counts(k, 0);
    for (int l : labels) ++counts[static_cast<std::size_t>(l)];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      double worst = -1.0;
      std::size_t arg = 0;
      for (std::size_t r = 0; r < n; ++r) {
        const auto l = static_cast<std::size_t>(labels[r]);
        if (counts[l] < 2) continue;
        const double d = SquaredDistance(x.row(r), centers.row(l));
        if (d > worst) {
          worst = d;
          arg = r;
        }
      }
      --counts[static_cast<std::size_t>(labels[arg])];
      labels[arg] = static_cast<int>(c);
      counts[c] = 1;
    }
    centers = Matrix(k, p);
    for (std::size_t r = 0; r < n; ++r) {
      auto row = x.row(r);
      auto center = centers.row(static_cast<std::size_t>(labels[r]));
      for (std::size_t j = 0; j < p; ++j) center[j] += row[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      for (double& v : centers.row(c)) v /= static_cast<double>(counts[c]);
    }
    out.inertia_trace.push_back(Assign(x, centers, next));
    out.n_iterations = it + 1;
    if (next == labels) {
      out.converged = true;
      break;
    }
    labels.swap(next);
  }
  out.labels = labels;
  out.n_clusters = CompactLabels(out.labels);
  if (out.n_clusters == k) {
    // Keep centroid rows aligned with the compacted label order.
    std::vector<int> order(k, -1);
    for (std::size_t r = 0; r < n; ++r) order[static_cast<std::size_t>(out.labels[r])] = labels[r];
    out.centroids = Matrix(k, p);
    for (std::size_t c = 0; c < k; ++c) {
      auto src = centers.row(static_cast<std::size_t>(order[c]));
      std::copy(src.begin(), src.end(), out.centroids.row(c).begin());
    }
  } else {
    out.centroids = Matrix(out.n_clusters, p);
    std::vector<double> counts(out.n_clusters, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto l = static_cast<std::size_t>(out.labels[r]);
      counts[l] += 1.0;
      for (std::size_t j = 0; j < p; ++j) out.centroids(l, j) += x(r, j);
    }
    for (std::size_t c = 0; c < out.n_clusters; ++c) {
      for (double& v : out.centroids.row(c)) v /= counts[c];
    }
  }
  return out;
}

ClusterResult Dbscan(const Matrix& x, double eps, std::size_t min_pts) {
  Require(x.rows() > 0 && x.cols() > 0, ErrorCode::kEmptyMatrix, "clustering needs data");
  Require(eps > 0.0, ErrorCode::kInvalidHyperparameter, "dbscan eps must be positive");
  Require(min_pts >= 1, ErrorCode::kInvalidHyperparameter, "dbscan min_pts must be at least 1");
  const std::size_t n = x.rows();
  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    CheckDeadline();
    for (std::size_t j = 0; j < n; ++j) {
      if (std::sqrt(SquaredDistance(x.row(i), x.row(j))) <= eps) neighbors[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= min_pts;

  ClusterResult out;
  out.labels.assign(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || out.labels[i] >= 0) continue;
    const int id = next++;
    std::deque<std::size_t> queue = {i};
    out.labels[i] = id;
    while (!queue.empty()) {
      const std::size_t q = queue.front();
      queue.pop_front();
      if (!core[q]) continue;
      for (std::size_t nb : neighbors[q]) {
        if (out.labels[nb] >= 0) continue;
        out.labels[nb] = id;
        queue.push_back(nb);
      }
    }
  }
  out.n_clusters = static_cast<std::size_t>(next);
  return out;
}

ClusterResult Agglomerative(const Matrix& x, std::size_t k, Linkage linkage) {
  RequireRows(x, k);
  const std::size_t n = x.rows();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = std::sqrt(SquaredDistance(x.row(i), x.row(j)));
    }
  }
  std::vector<bool> active(n, true);
  std::vector<std::size_t> size(n, 1);
  std::vector<std::size_t> id(n);  // dendrogram id of the cluster held in slot i
  std::iota(id.begin(), id.end(), 0);

  ClusterResult out;
  for (std::size_t step = 0; step + 1 < n; ++step) {
    CheckDeadline();
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0;
    std::size_t bj = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && d(i, j) < best) {
          best = d(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    const std::size_t merged = n + step;
    out.dendrogram.push_back(
        Merge{std::min(id[bi], id[bj]), std::max(id[bi], id[bj]), best, size[bi] + size[bj]});
    for (std::size_t m = 0; m < n; ++m) {
      if (!active[m] || m == bi || m == bj) continue;
      double v = 0.0;
      switch (linkage) {
        case Linkage::kSingle: v = std::min(d(m, bi), d(m, bj)); break;
        case Linkage::kComplete: v = std::max(d(m, bi), d(m, bj)); break;
        case Linkage::kAverage:
          v = (static_cast<double>(size[bi]) * d(m, bi) + static_cast<double>(size[bj]) * d(m, bj)) /
              static_cast<double>(size[bi] + size[bj]);
          break;
      }
      d(m, bi) = d(bi, m) = v;
    }
    size[bi] += size[bj];
    active[bj] = false;
    id[bi] = merged;
  }

  // Cut: replay only the first n - k merges.
  const std::size_t merges = n - k;
  std::vector<std::size_t> root(2 * n - 1);
  std::iota(root.begin(), root.end(), 0);
  for (std::size_t s = 0; s < merges; ++s) {
    root[out.dendrogram[s].a] = n + s;
    root[out.dendrogram[s].b] = n + s;
  }
  auto find = [&](std::size_t v) {
    while (root[v] != v) v = root[v];
    return v;
  };
  out.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) out.labels[r] = static_cast<int>(find(r));
  out.n_clusters = CompactLabels(out.labels);
  return out;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

struct ComponentCache {
  Matrix lower;
  double log_det = 0.0;
};

ComponentCache Factor(const Matrix& covariance) {
  ComponentCache cache;
  const bool ok = Cholesky(covariance, cache.lower);
  Require(ok, ErrorCode::kInternal, "gmm covariance lost positive definiteness");
  for (std::size_t i = 0; i < covariance.rows(); ++i) cache.log_det += 2.0 * std::log(cache.lower(i, i));
  return cache;
}

double LogDensity(std::span<const double> row, const GaussianComponent& comp,
                  const ComponentCache& cache, Vector& work) {
  const std::size_t p = row.size();
  work.resize(p);
  // Forward substitution: L z = x - mu.
  double quad = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    double s = row[i] - comp.mean[i];
    for (std::size_t j = 0; j < i; ++j) s -= cache.lower(i, j) * work[j];
    work[i] = s / cache.lower(i, i);
    quad += work[i] * work[i];
  }
  return -0.5 * (static_cast<double>(p) * kLog2Pi + cache.log_det + quad);
}

void MStep(const Matrix& x, const Matrix& resp, double ridge,
           std::vector<GaussianComponent>& comps) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  for (std::size_t c = 0; c < comps.size(); ++c) {
    double nk = 0.0;
    Vector mean(p, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      nk += resp(r, c);
      for (std::size_t j = 0; j < p; ++j) mean[j] += resp(r, c) * x(r, j);
    }
    GaussianComponent& comp = comps[c];
    comp.weight = nk / static_cast<double>(n);
    comp.covariance = Matrix(p, p);
    if (nk <= 0.0) {
      // A starved component keeps its mean and falls back to the ridge.
      for (std::size_t j = 0; j < p; ++j) comp.covariance(j, j) = ridge;
      continue;
    }
    for (double& v : mean) v /= nk;
    for (std::size_t r = 0; r < n; ++r) {
      const double w = resp(r, c);
      if (w == 0.0) continue;
      for (std::size_t i = 0; i < p; ++i) {
        const double di = x(r, i) - mean[i];
        for (std::size_t j = i; j < p; ++j) comp.covariance(i, j) += w * di * (x(r, j) - mean[j]);
      }
    }
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = i; j < p; ++j) {
        comp.covariance(i, j) /= nk;
        comp.covariance(j, i) = comp.covariance(i, j);
      }
      comp.covariance(i, i) += ridge;
    }
    comp.mean = std::move(mean);
  }
}

// Fills responsibilities and returns the total log-likelihood.
double EStep(const Matrix& x, const std::vector<GaussianComponent>& comps, Matrix& resp) {
  const std::size_t n = x.rows();
  const std::size_t k = comps.size();
  std::vector<ComponentCache> caches;
  for (const auto& c : comps) caches.push_back(Factor(c.covariance));
  resp = Matrix(n, k);
  Vector work;
  Vector logp(k);
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      logp[c] = comps[c].weight > 0.0
                    ? std::log(comps[c].weight) + LogDensity(x.row(r), comps[c], caches[c], work)
                    : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, logp[c]);
    }
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) s += std::exp(logp[c] - mx);
    const double lse = mx + std::log(s);
    total += lse;
    for (std::size_t c = 0; c < k; ++c) resp(r, c) = std::exp(logp[c] - lse);
  }
  return total;
}

}  // namespace

ClusterResult Gmm(const Matrix& x, std::size_t k, std::uint64_t seed, std::size_t max_iterations,
                  double tolerance, double ridge) {
  RequireRows(x, k);
  const std::size_t n = x.rows();
  const ClusterResult init = KMeans(x, k, seed);

  // Start from the k-means partition as hard responsibilities.
  std::vector<GaussianComponent> comps(k);
  for (auto& c : comps) c.mean = ColumnMeans(x);
  Matrix resp(n, k);
  for (std::size_t r = 0; r < n; ++r) resp(r, static_cast<std::size_t>(init.labels[r])) = 1.0;
  MStep(x, resp, ridge, comps);

  ClusterResult out;
  out.converged = false;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    CheckDeadline();
    const double ll = EStep(x, comps, resp);
    out.log_likelihood_trace.push_back(ll);
    out.n_iterations = it + 1;
    if (it > 0) {
      const double prev = out.log_likelihood_trace[it - 1];
      if (std::abs(ll - prev) < tolerance * std::max(std::abs(prev), 1e-300)) {
        out.converged = true;
        break;
      }
    }
    if (it + 1 == max_iterations) break;
    MStep(x, resp, ridge, comps);
  }

  out.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = resp.row(r);
    out.labels[r] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  out.n_clusters = k;
  out.centroids = Matrix(k, x.cols());
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(comps[c].mean.begin(), comps[c].mean.end(), out.centroids.row(c).begin());
  }
  out.components = std::move(comps);
  out.responsibilities = std::move(resp);
  return out;
}

ClusterResult Cluster(const Matrix& x, const ClusterSpec& spec) {
  switch (spec.algorithm) {
    case ClusterAlgorithm::kKmeans: return KMeans(x, spec.k, spec.seed);
    case ClusterAlgorithm::kDbscan: return Dbscan(x, spec.eps, spec.min_pts);
    case ClusterAlgorithm::kAgglomerative: return Agglomerative(x, spec.k, spec.linkage);
    case ClusterAlgorithm::kGmm: return Gmm(x, spec.k, spec.seed);
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown clustering algorithm");
}

std::optional<double> Silhouette(const Matrix& x, std::span<const int> labels) {
  Require(labels.size() == x.rows(), ErrorCode::kLengthMismatch, "labels do not match rows");
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  if (max_label < 1) return std::nullopt;
  const auto k = static_cast<std::size_t>(max_label) + 1;
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) {
    if (l >= 0) ++counts[static_cast<std::size_t>(l)];
  }
  if (std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; }) < 2) {
    return std::nullopt;
  }
  double total = 0.0;
  std::size_t used = 0;
  Vector sums(k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    CheckDeadline();
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < x.rows(); ++j) {
      if (labels[j] < 0 || j == i) continue;
      sums[static_cast<std::size_t>(labels[j])] += std::sqrt(SquaredDistance(x.row(i), x.row(j)));
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    ++used;
    if (counts[own] == 1) continue;  // singleton scores 0
    const double a = sums[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      if (c == own || counts[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(counts[c]));
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / static_cast<double>(used);
}

double DbscanEpsHeuristic(const Matrix& x, std::size_t min_pts) {
  Require(x.rows() > 0, ErrorCode::kEmptyMatrix, "clustering needs data");
  const std::size_t n = x.rows();
  const std::size_t rank = std::min(std::max<std::size_t>(min_pts, 1), n) - 1;
  std::vector<double> kdist(n);
  Vector dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) dist[j] = std::sqrt(SquaredDistance(x.row(i), x.row(j)));
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(rank), dist.end());
    kdist[i] = dist[rank];
  }
  std::sort(kdist.begin(), kdist.end());
  const double eps = preprocess::QuantileSorted(kdist, 0.9);
  return eps > 0.0 ? eps : 1e-9;
}

nlohmann::json ToJson(const ClusterResult& result) {
  nlohmann::json j = {{"labels", result.labels},
                      {"n_clusters", result.n_clusters},
                      {"n_iterations", result.n_iterations},
                      {"converged", result.converged}};
  if (result.centroids.rows() > 0) {
    nlohmann::json c = nlohmann::json::array();
    for (std::size_t r = 0; r < result.centroids.rows(); ++r) {
      auto row = result.centroids.row(r);
      c.push_back(Vector(row.begin(), row.end()));
    }
    j["centroids"] = c;
  }
  if (!result.inertia_trace.empty()) {
    j["inertia"] = result.inertia();
    j["inertia_trace"] = result.inertia_trace;
  }
  if (!result.log_likelihood_trace.empty()) {
    j["log_likelihood_trace"] = result.log_likelihood_trace;
    nlohmann::json w = nlohmann::json::array();
    for (const auto& c : result.components) w.push_back(c.weight);
    j["weights"] = w;
  }
  if (!result.dendrogram.empty()) {
    nlohmann::json d = nlohmann::json::array();
    for (const auto& m : result.dendrogram) d.push_back({m.a, m.b, m.distance, m.size});
    j["dendrogram"] = d;
  }
  return j;
}

}  // namespace tabml::unsupervised
