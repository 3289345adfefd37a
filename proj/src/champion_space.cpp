#include "teamdesign/champion_space.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_set>

#include "teamdesign/rng.hpp"

namespace teamdesign {

void ChampionCatalog::validate() const {
  if (feature_names.size() < 2) throw data_error("catalog needs at least 2 features");
  if (static_cast<std::size_t>(features.cols()) != feature_names.size())
    throw data_error("catalog feature dimension mismatch: header has " +
                     std::to_string(feature_names.size()) + " columns, rows have " +
                     std::to_string(features.cols()));
  if (static_cast<std::size_t>(features.rows()) != ids.size())
    throw data_error("catalog row count does not match id count");
  std::unordered_set<ChampionId> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw data_error("duplicate champion id: " + id);
}

std::size_t SimilaritySpace::index_of(const ChampionId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw not_found("unknown champion: " + id);
  return it->second;
}

void SimilaritySpace::reindex() {
  index_.clear();
  for (std::size_t i = 0; i < ids.size(); ++i) index_.emplace(ids[i], i);
}

Eigen::VectorXd SimilaritySpace::project(const Eigen::VectorXd& raw) const {
  if (raw.size() != mean.size()) throw invalid_argument("feature vector dimension mismatch");
  Eigen::VectorXd z = (raw - mean).cwiseQuotient(std);
  for (int c : dropped_columns) z[c] = 0.0;
  return loadings.transpose() * z;
}

double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double champ_similarity(const SimilaritySpace& space, const ChampionId& a, const ChampionId& b) {
  const auto i = space.index_of(a);
  const auto j = space.index_of(b);
  if (i == j) return 1.0;
  return cosine_similarity(space.coords.row(i).transpose(), space.coords.row(j).transpose());
}

double champ_distance(const SimilaritySpace& space, const ChampionId& a, const ChampionId& b) {
  return 1.0 - champ_similarity(space, a, b);
}

Eigen::MatrixXd cosine_distance_matrix(const Eigen::MatrixXd& coords) {
  const auto n = coords.rows();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d =
          std::clamp(1.0 - cosine_similarity(coords.row(i).transpose(), coords.row(j).transpose()), 0.0, 2.0);
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

namespace {

// Flip each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index best = 0;
    m.col(c).cwiseAbs().maxCoeff(&best);
    if (m(best, c) < 0) m.col(c) *= -1.0;
  }
}

struct LloydRun {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;
  double inertia = std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  int iterations = 0;
  bool converged = false;
};

Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& x, int k, CounterRng& rng) {
  const auto n = x.rows();
  Eigen::MatrixXd c(k, x.cols());
  c.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
  Eigen::VectorXd d2 = (x.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total <= 0.0) {
      pick = static_cast<Eigen::Index>(rng.below(n));
    } else {
      double target = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= d2[pick];
        if (target < 0.0) break;
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;
    }
    c.row(j) = x.row(pick);
    d2 = d2.cwiseMin((x.rowwise() - c.row(j)).rowwise().squaredNorm());
  }
  return c;
}

double assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& c, std::vector<int>& labels,
              Eigen::VectorXd& d2) {
  double inertia = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
      const double d = (x.row(i) - c.row(j)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    labels[i] = best;
    d2[i] = best_d;
    inertia += best_d;
  }
  return inertia;
}

LloydRun lloyd(const Eigen::MatrixXd& x, int k, CounterRng rng, int max_iterations) {
  const auto n = x.rows();
  LloydRun run;
  run.centroids = seed_centroids(x, k, rng);
  run.labels.assign(n, -1);
  std::vector<int> labels(n, 0);
  Eigen::VectorXd d2(n);
  for (int it = 0; it < max_iterations; ++it) {
    assign(x, run.centroids, labels, d2);

    // Repair empty clusters by moving in the point that contributes most.
    std::vector<int> counts(k, 0);
    for (int l : labels) ++counts[l];
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i)
        if (counts[labels[i]] > 1 && (far < 0 || d2[i] > d2[far])) far = i;
      --counts[labels[far]];
      labels[far] = j;
      ++counts[j];
      d2[far] = 0.0;
      run.centroids.row(j) = x.row(far);
    }

    run.iterations = it + 1;
    const bool stable = labels == run.labels;
    run.labels = labels;
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
    for (Eigen::Index i = 0; i < n; ++i) next.row(labels[i]) += x.row(i);
    for (int j = 0; j < k; ++j) next.row(j) /= counts[j];
    run.centroids = next;
    // Objective with refreshed centroids; Lloyd guarantees this never rises.
    double refreshed = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) refreshed += (x.row(i) - run.centroids.row(labels[i])).squaredNorm();
    run.inertia = refreshed;
    run.trace.push_back(refreshed);
    if (stable) {
      run.converged = true;
      break;
    }
  }
  return run;
}

std::vector<int> relabel_by_first_appearance(const std::vector<int>& labels, int k,
                                             Eigen::MatrixXd& centroids) {
  std::vector<int> map(k, -1);
  int next = 0;
  for (int l : labels)
    if (map[l] < 0) map[l] = next++;
  Eigen::MatrixXd reordered(centroids.rows(), centroids.cols());
  for (int j = 0; j < k; ++j) reordered.row(map[j]) = centroids.row(j);
  centroids = reordered;
  std::vector<int> out(labels.size());
  std::transform(labels.begin(), labels.end(), out.begin(), [&](int l) { return map[l]; });
  return out;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts,
                    int max_iterations) {
  if (k < 1) throw invalid_argument("k-means needs k >= 1");
  if (points.rows() < k) throw invalid_argument("fewer points than clusters");
  std::set<std::vector<double>> distinct;
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    distinct.insert(std::vector<double>(points.row(i).begin(), points.row(i).end()));
  if (distinct.size() < static_cast<std::size_t>(k)) throw data_error("fewer distinct points than clusters");

  const CounterRng base(seed, 0x6b6d65616e73ULL);
  LloydRun best;
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    LloydRun run = lloyd(points, k, base.derive(static_cast<std::uint64_t>(r)), max_iterations);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  KMeansResult out;
  out.centroids = best.centroids;
  out.labels = relabel_by_first_appearance(best.labels, k, out.centroids);
  out.inertia = best.inertia;
  out.objective_trace = std::move(best.trace);
  out.iterations = best.iterations;
  out.converged = best.converged;
  return out;
}

Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims) {
  const auto n = dist.rows();
  if (dist.cols() != n) throw invalid_argument("distance matrix must be square");
  if (dims < 1 || dims > n) throw invalid_argument("invalid MDS dimension");
  const Eigen::MatrixXd d2 = dist.array().square().matrix();
  const Eigen::VectorXd row_mean = d2.rowwise().mean();
  const Eigen::VectorXd col_mean = d2.colwise().mean().transpose();
  const double grand = d2.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (d2(i, j) - row_mean[i] - col_mean[j] + grand);
  b = 0.5 * (b + b.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Eigen::MatrixXd out(n, dims);
  for (int k = 0; k < dims; ++k) {
    const Eigen::Index col = n - 1 - k;
    out.col(k) = eig.eigenvectors().col(col) * std::sqrt(std::max(eig.eigenvalues()[col], 0.0));
  }
  canonicalize_signs(out);
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw invalid_argument("partitions differ in size");
  std::map<std::pair<int, int>, long long> joint;
  std::map<int, long long> ca, cb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++joint[{a[i], b[i]}];
    ++ca[a[i]];
    ++cb[b[i]];
  }
  auto choose2 = [](long long n) { return static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; };
  double index = 0, sa = 0, sb = 0;
  for (const auto& [_, n] : joint) index += choose2(n);
  for (const auto& [_, n] : ca) sa += choose2(n);
  for (const auto& [_, n] : cb) sb += choose2(n);
  const double total = choose2(static_cast<long long>(a.size()));
  const double expected = total > 0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

SimilaritySpace build_space(const ChampionCatalog& catalog, const SpaceParams& params) {
  catalog.validate();
  const auto n = static_cast<Eigen::Index>(catalog.size());
  const auto d = static_cast<Eigen::Index>(catalog.dimension());
  if (params.clusters < 1 || params.components < 1)
    throw invalid_argument("components and clusters must be positive");
  if (n < params.clusters) throw data_error("fewer champions than clusters");
  if (n < 2) throw data_error("need at least 2 champions");

  SimilaritySpace space;
  space.params = params;
  space.feature_names = catalog.feature_names;
  space.ids = catalog.ids;
  space.reindex();

  const Eigen::MatrixXd& x = catalog.features;
  space.mean = x.colwise().mean().transpose();
  space.std.resize(d);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index c = 0; c < d; ++c) {
    const double var = (x.col(c).array() - space.mean[c]).square().sum() / static_cast<double>(n - 1);
    // Constant up to rounding relative to the column's magnitude.
    const double scale = std::max(1.0, std::abs(space.mean[c]));
    if (var <= 1e-24 * scale * scale) {
      space.std[c] = 1.0;
      space.dropped_columns.push_back(static_cast<int>(c));
    } else {
      space.std[c] = std::sqrt(var);
      kept.push_back(c);
    }
  }
  if (kept.empty()) throw data_error("all feature columns are constant");
  if (!space.dropped_columns.empty())
    spdlog::warn("dropping {} zero-variance feature column(s)", space.dropped_columns.size());

  const auto dk = static_cast<Eigen::Index>(kept.size());
  const auto p = static_cast<Eigen::Index>(params.components);
  if (p > std::min(dk, n - 1))
    throw invalid_argument("components must not exceed min(D, N-1) = " +
                           std::to_string(std::min(dk, n - 1)));

  Eigen::MatrixXd z(n, dk);
  for (Eigen::Index j = 0; j < dk; ++j)
    z.col(j) = (x.col(kept[j]).array() - space.mean[kept[j]]) / space.std[kept[j]];

  const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw data_error("PCA eigendecomposition failed");
  const double total_variance = cov.trace();

  Eigen::MatrixXd kept_loadings(dk, p);
  space.explained_variance.resize(p);
  for (Eigen::Index k = 0; k < p; ++k) {
    const Eigen::Index col = dk - 1 - k;
    kept_loadings.col(k) = eig.eigenvectors().col(col);
    space.explained_variance[k] = std::max(eig.eigenvalues()[col], 0.0);
  }
  canonicalize_signs(kept_loadings);
  space.explained_variance_ratio = space.explained_variance / total_variance;

  space.loadings = Eigen::MatrixXd::Zero(d, p);
  for (Eigen::Index j = 0; j < dk; ++j) space.loadings.row(kept[j]) = kept_loadings.row(j);
  space.coords = z * kept_loadings;

  Eigen::VectorXd norms = space.coords.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (norms[i] == 0.0) spdlog::warn("champion {} has zero-norm coordinates; similarity to others is 0", space.ids[i]);

  space.dist = cosine_distance_matrix(space.coords);

  const KMeansResult km =
      kmeans(space.coords, params.clusters, params.seed, params.restarts, params.max_iterations);
  space.cluster.resize(n);
  std::transform(km.labels.begin(), km.labels.end(), space.cluster.begin(), [](int l) { return l + 1; });
  space.kmeans_inertia = km.inertia;

  space.mds_xy = classical_mds(space.dist, 2);
  return space;
}

void DistanceRatings::add(const ChampionId& a, const ChampionId& b, double rating) {
  if (rating < scale_min_ || rating > scale_max_)
    throw data_error("rating out of scale for pair " + a + "/" + b);
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  if (!entries_.emplace(std::move(key), rating).second)
    throw data_error("duplicate rating for pair " + a + "/" + b);
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.empty()) throw invalid_argument("pearson needs equal nonempty inputs");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw data_error("zero variance in correlation input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

DistanceCorrelation correlate_distances(const SimilaritySpace& space, const DistanceRatings& ratings) {
  std::vector<double> feature, rated;
  DistanceCorrelation out;
  for (const auto& [pair, rating] : ratings.entries()) {
    if (!space.contains(pair.first) || !space.contains(pair.second)) {
      ++out.skipped;
      continue;
    }
    feature.push_back(space.dist(space.index_of(pair.first), space.index_of(pair.second)));
    rated.push_back(rating);
  }
  out.used = feature.size();
  if (out.used < 3) throw data_error("fewer than 3 usable rated pairs");
  out.pearson = pearson(feature, rated);
  return out;
}

}  // namespace teamdesign
