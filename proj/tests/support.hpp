#pragma once

// Shared fixtures for the unit suites. Everything here is built from first
// principles so it can serve as an oracle for the library.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/rng.hpp"

namespace testsupport {

using teamdesign::ChampionCatalog;
using teamdesign::CounterRng;
using teamdesign::SimilaritySpace;

inline std::string champ_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%03d", i);
  return buf;
}

inline ChampionCatalog catalog_from(const Eigen::MatrixXd& x) {
  ChampionCatalog c;
  c.features = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) c.ids.push_back(champ_name(static_cast<int>(i)));
  for (Eigen::Index j = 0; j < x.cols(); ++j) c.feature_names.push_back("f" + std::to_string(j));
  return c;
}

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, CounterRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

struct Blobs {
  ChampionCatalog catalog;
  std::vector<int> labels;
};

/// `k` unit-variance blobs whose centers are pairwise `separation` apart
/// along random orthonormal directions (so every column carries structure
/// and per-column standardization does not erase it).
inline Blobs blob_catalog(int n, int d, int k, double separation, std::uint64_t seed) {
  CounterRng rng(seed, 99);
  Eigen::MatrixXd dirs = gaussian_matrix(d, k, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(dirs);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, k);
  Eigen::MatrixXd x(n, d);
  Blobs b;
  for (int i = 0; i < n; ++i) {
    const int label = i % k;
    b.labels.push_back(label);
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal() + q(j, label) * separation / std::sqrt(2.0);
  }
  b.catalog = catalog_from(x);
  return b;
}

/// A space assembled directly from coordinates and cluster labels (1-based),
/// bypassing PCA, for testing metric code against exact geometry.
inline SimilaritySpace space_from_coords(const Eigen::MatrixXd& coords, std::vector<int> clusters) {
  SimilaritySpace s;
  for (Eigen::Index i = 0; i < coords.rows(); ++i) s.ids.push_back(champ_name(static_cast<int>(i)));
  s.coords = coords;
  s.loadings = Eigen::MatrixXd::Identity(coords.cols(), coords.cols());
  s.mean = Eigen::VectorXd::Zero(coords.cols());
  s.std = Eigen::VectorXd::Ones(coords.cols());
  s.dist = teamdesign::cosine_distance_matrix(coords);
  s.cluster = std::move(clusters);
  s.params.components = static_cast<int>(coords.cols());
  s.params.clusters = s.cluster.empty() ? 1 : *std::max_element(s.cluster.begin(), s.cluster.end());
  s.mds_xy = Eigen::MatrixXd::Zero(coords.rows(), 2);
  s.reindex();
  return s;
}

/// Independent cosine similarity written out longhand.
inline double cosine_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace testsupport
