#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "teamdesign/types.hpp"

namespace teamdesign {

/// Raw per-champion feature table, one row per champion.
struct ChampionCatalog {
  std::vector<std::string> feature_names;
  std::vector<ChampionId> ids;
  Eigen::MatrixXd features;  // N x D

  std::size_t size() const { return ids.size(); }
  std::size_t dimension() const { return feature_names.size(); }

  /// Throws Error(Data) on ragged rows, duplicate ids or D < 2.
  void validate() const;
};

struct SpaceParams {
  int components = 10;
  int clusters = 5;
  std::uint64_t seed = 0;
  int restarts = 10;
  int max_iterations = 300;
};

/// Champion similarity space: z-scored features projected onto the leading
/// principal components, plus derived distances, clusters and a 2-D layout.
/// Immutable once built.
struct SimilaritySpace {
  SpaceParams params;
  std::vector<std::string> feature_names;
  std::vector<ChampionId> ids;

  Eigen::VectorXd mean;                      // D
  Eigen::VectorXd std;                       // D, 1.0 for dropped columns
  std::vector<int> dropped_columns;          // zero-variance columns, excluded from PCA
  Eigen::MatrixXd loadings;                  // D x P, zero rows for dropped columns
  Eigen::VectorXd explained_variance;        // P
  Eigen::VectorXd explained_variance_ratio;  // P
  Eigen::MatrixXd coords;                    // N x P
  Eigen::MatrixXd dist;                      // N x N cosine distances
  std::vector<int> cluster;                  // N labels in 1..K
  Eigen::MatrixXd mds_xy;                    // N x 2
  double kmeans_inertia = 0.0;

  std::size_t size() const { return ids.size(); }
  int components() const { return static_cast<int>(loadings.cols()); }
  int clusters() const { return params.clusters; }

  bool contains(const ChampionId& id) const { return index_.count(id) != 0; }
  /// Throws Error(NotFound) for unknown ids.
  std::size_t index_of(const ChampionId& id) const;
  int cluster_of(const ChampionId& id) const { return cluster[index_of(id)]; }

  /// Projects a raw feature vector (length D) into PC coordinates.
  Eigen::VectorXd project(const Eigen::VectorXd& raw) const;

  /// Must be called after ids change (builder and loaders do this).
  void reindex();

 private:
  std::unordered_map<ChampionId, std::size_t> index_;
};

SimilaritySpace build_space(const ChampionCatalog& catalog, const SpaceParams& params = {});

/// Cosine similarity; a zero-norm operand gives 0.
double cosine_similarity(const Eigen::Ref<const Eigen::VectorXd>& a,
                         const Eigen::Ref<const Eigen::VectorXd>& b);

/// Pairwise 1 - cosine similarity between rows, clamped to [0, 2] with an
/// exact zero diagonal.
Eigen::MatrixXd cosine_distance_matrix(const Eigen::MatrixXd& coords);

double champ_similarity(const SimilaritySpace& space, const ChampionId& a, const ChampionId& b);
double champ_distance(const SimilaritySpace& space, const ChampionId& a, const ChampionId& b);

struct KMeansResult {
  std::vector<int> labels;  // 0-based, canonicalized by first appearance
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
  std::vector<double> objective_trace;  // inertia after each assignment step, best restart
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's k-means with k-means++ seeding and `restarts` independent runs;
/// the lowest-inertia run wins. Assignment ties go to the lowest cluster index.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iterations = 300);

/// Classical (Torgerson) scaling of a distance matrix into `dims` coordinates.
Eigen::MatrixXd classical_mds(const Eigen::MatrixXd& dist, int dims = 2);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

/// Mean subjective ratings per unordered champion pair.
class DistanceRatings {
 public:
  DistanceRatings(double scale_min, double scale_max) : scale_min_(scale_min), scale_max_(scale_max) {}

  /// Throws Error(Data) on a repeated pair or an out-of-scale rating.
  void add(const ChampionId& a, const ChampionId& b, double rating);

  double scale_min() const { return scale_min_; }
  double scale_max() const { return scale_max_; }
  const std::map<std::pair<ChampionId, ChampionId>, double>& entries() const { return entries_; }

 private:
  double scale_min_;
  double scale_max_;
  std::map<std::pair<ChampionId, ChampionId>, double> entries_;
};

struct DistanceCorrelation {
  double pearson = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
};

DistanceCorrelation correlate_distances(const SimilaritySpace& space, const DistanceRatings& ratings);

/// Plain two-pass Pearson correlation. Throws Error(Data) on zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

}  // namespace teamdesign
