#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "support.hpp"
#include "teamdesign/champion_space.hpp"

using namespace teamdesign;
using namespace testsupport;

namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void check_space_invariants(const SimilaritySpace& s) {
  const auto p = s.loadings.cols();
  CHECK(max_abs(s.loadings.transpose() * s.loadings - Eigen::MatrixXd::Identity(p, p)) <= 1e-8);
  for (Eigen::Index k = 1; k < s.explained_variance.size(); ++k)
    CHECK(s.explained_variance[k] <= s.explained_variance[k - 1]);
  const auto n = static_cast<Eigen::Index>(s.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(s.dist(i, i) == 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      CHECK(s.dist(i, j) == s.dist(j, i));
      CHECK(s.dist(i, j) >= 0.0);
      CHECK(s.dist(i, j) <= 2.0);
      if (i != j)
        CHECK(std::abs(s.dist(i, j) - (1.0 - cosine_oracle(s.coords.row(i), s.coords.row(j)))) <= 1e-9);
    }
  }
  std::vector<int> counts(s.clusters() + 1, 0);
  for (int c : s.cluster) {
    REQUIRE(c >= 1);
    REQUIRE(c <= s.clusters());
    ++counts[c];
  }
  for (int k = 1; k <= s.clusters(); ++k) CHECK(counts[k] > 0);
}

}  // namespace

TEST_CASE("orthogonal coordinate rows are at distance one") {
  const Eigen::MatrixXd coords = Eigen::MatrixXd::Identity(5, 5) * 3.0;
  const Eigen::MatrixXd d = cosine_distance_matrix(coords);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK(d(i, j) == doctest::Approx(i == j ? 0.0 : 1.0).epsilon(1e-15));
}

TEST_CASE("one-hot catalog standardizes to a regular simplex") {
  // Centered one-hot rows have pairwise cosine -1/(N-1).
  const SimilaritySpace s = build_space(catalog_from(Eigen::MatrixXd::Identity(5, 5)), {4, 2, 1});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      if (i != j) CHECK(s.dist(i, j) == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(s.explained_variance_ratio.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rank-10 catalog is fully explained by ten components") {
  CounterRng rng(7);
  const Eigen::MatrixXd x = gaussian_matrix(40, 10, rng) * gaussian_matrix(10, 30, rng);
  const ChampionCatalog cat = catalog_from(x);
  const SimilaritySpace s = build_space(cat, {10, 5, 3});
  CHECK(std::abs(s.explained_variance_ratio.sum() - 1.0) <= 1e-9);
  // Reconstruction of the standardized matrix from the retained components.
  Eigen::MatrixXd z(40, 30);
  for (int j = 0; j < 30; ++j) z.col(j) = (x.col(j).array() - s.mean[j]) / s.std[j];
  CHECK(max_abs(z - s.coords * s.loadings.transpose()) <= 1e-9);
  check_space_invariants(s);
}

TEST_CASE("space invariants on a random catalog") {
  CounterRng rng(11);
  const SimilaritySpace s = build_space(catalog_from(gaussian_matrix(60, 25, rng)), {10, 5, 42});
  check_space_invariants(s);
  CHECK(s.components() == 10);
  CHECK(s.mds_xy.rows() == 60);
  CHECK(s.mds_xy.cols() == 2);
}

TEST_CASE("build_space is deterministic") {
  CounterRng rng(3);
  const ChampionCatalog cat = catalog_from(gaussian_matrix(50, 20, rng));
  const SimilaritySpace a = build_space(cat, {8, 5, 9});
  const SimilaritySpace b = build_space(cat, {8, 5, 9});
  CHECK(a.coords == b.coords);
  CHECK(a.dist == b.dist);
  CHECK(a.cluster == b.cluster);
  CHECK(a.mds_xy == b.mds_xy);
}

TEST_CASE("well-separated blobs are recovered exactly across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Blobs blobs = blob_catalog(126, 40, 5, 20.0, 1000 + seed);
    const SimilaritySpace s = build_space(blobs.catalog, {10, 5, seed});
    CHECK(adjusted_rand_index(s.cluster, blobs.labels) == doctest::Approx(1.0));
  }
}

TEST_CASE("MDS pairwise distances do not depend on champion order") {
  CounterRng rng(21);
  const ChampionCatalog cat = catalog_from(gaussian_matrix(45, 18, rng));
  std::vector<int> perm(45);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<int>(perm));
  ChampionCatalog shuffled = cat;
  for (int i = 0; i < 45; ++i) {
    shuffled.ids[i] = cat.ids[perm[i]];
    shuffled.features.row(i) = cat.features.row(perm[i]);
  }
  const SimilaritySpace a = build_space(cat, {10, 5, 1});
  const SimilaritySpace b = build_space(shuffled, {10, 5, 1});
  double worst = 0.0;
  for (int i = 0; i < 45; ++i)
    for (int j = 0; j < 45; ++j) {
      const double da = (a.mds_xy.row(i) - a.mds_xy.row(j)).norm();
      const auto bi = b.index_of(a.ids[i]);
      const auto bj = b.index_of(a.ids[j]);
      const double db = (b.mds_xy.row(bi) - b.mds_xy.row(bj)).norm();
      worst = std::max(worst, std::abs(da - db));
    }
  CHECK(worst <= 1e-9);
}

TEST_CASE("classical MDS reproduces Euclidean configurations") {
  CounterRng rng(5);
  const Eigen::MatrixXd pts = gaussian_matrix(12, 2, rng);
  Eigen::MatrixXd d(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) d(i, j) = (pts.row(i) - pts.row(j)).norm();
  const Eigen::MatrixXd xy = classical_mds(d, 2);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) CHECK((xy.row(i) - xy.row(j)).norm() == doctest::Approx(d(i, j)).epsilon(1e-9));
}

TEST_CASE("k-means objective never increases and respects the iteration cap") {
  CounterRng rng(8);
  const Eigen::MatrixXd pts = gaussian_matrix(200, 4, rng);
  for (int cap : {1, 3, 50}) {
    const KMeansResult r = kmeans(pts, 6, 17, 4, cap);
    CHECK(r.iterations <= cap);
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-9);
    std::vector<int> seen(6, 0);
    for (int l : r.labels) seen[l] = 1;
    CHECK(std::accumulate(seen.begin(), seen.end(), 0) == 6);
  }
}

TEST_CASE("k-means rejects too few distinct points") {
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(10, 2);
  pts(0, 0) = 1.0;
  CHECK_THROWS_AS(kmeans(pts, 3, 0), Error);
}

TEST_CASE("adjusted Rand index") {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  const std::vector<int> b{5, 5, 3, 3, 9, 9};
  CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));
  const std::vector<int> c{0, 1, 0, 1, 0, 1};
  CHECK(adjusted_rand_index(a, c) < 0.1);
}

TEST_CASE("champ_similarity") {
  CounterRng rng(31);
  Eigen::MatrixXd coords = gaussian_matrix(6, 10, rng);
  coords.row(1) = -coords.row(0);
  const SimilaritySpace s = space_from_coords(coords, {1, 2, 3, 4, 5, 1});
  CHECK(champ_similarity(s, "C000", "C000") == 1.0);
  CHECK(champ_similarity(s, "C000", "C001") == doctest::Approx(-1.0).epsilon(1e-15));
  for (int i = 2; i < 6; ++i)
    CHECK(std::abs(champ_similarity(s, "C000", champ_name(i)) - cosine_oracle(coords.row(0), coords.row(i))) <=
          1e-12);
  CHECK(champ_distance(s, "C002", "C003") == doctest::Approx(1.0 - champ_similarity(s, "C002", "C003")));
  CHECK_THROWS_AS(champ_similarity(s, "C000", "nope"), Error);
}

TEST_CASE("zero-norm coordinates have similarity zero") {
  Eigen::MatrixXd coords(3, 2);
  coords << 0, 0, 1, 0, 0, 1;
  const SimilaritySpace s = space_from_coords(coords, {1, 2, 3});
  CHECK(champ_similarity(s, "C000", "C001") == 0.0);
  CHECK(s.dist(0, 1) == 1.0);
}

TEST_CASE("build_space error paths") {
  CounterRng rng(1);
  ChampionCatalog bad = catalog_from(gaussian_matrix(10, 4, rng));
  bad.feature_names.pop_back();
  CHECK_THROWS_AS(build_space(bad), Error);

  CHECK_THROWS_AS(build_space(catalog_from(gaussian_matrix(4, 6, rng)), {2, 5, 0}), Error);
  CHECK_THROWS_AS(build_space(catalog_from(Eigen::MatrixXd::Constant(8, 3, 2.0)), {2, 2, 0}), Error);
  CHECK_THROWS_AS(build_space(catalog_from(gaussian_matrix(8, 30, rng)), {8, 2, 0}), Error);

  ChampionCatalog dup = catalog_from(gaussian_matrix(6, 3, rng));
  dup.ids[1] = dup.ids[0];
  CHECK_THROWS_AS(build_space(dup, {2, 2, 0}), Error);
}

TEST_CASE("zero-variance columns are dropped, not divided by") {
  CounterRng rng(4);
  Eigen::MatrixXd x = gaussian_matrix(30, 6, rng);
  x.col(2).setConstant(7.0);
  const SimilaritySpace s = build_space(catalog_from(x), {4, 3, 0});
  REQUIRE(s.dropped_columns == std::vector<int>{2});
  CHECK(s.loadings.row(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s.coords.allFinite());
  check_space_invariants(s);
}

TEST_CASE("project reproduces stored coordinates") {
  CounterRng rng(12);
  const ChampionCatalog cat = catalog_from(gaussian_matrix(30, 8, rng));
  const SimilaritySpace s = build_space(cat, {5, 3, 0});
  for (int i = 0; i < 30; ++i)
    CHECK((s.project(cat.features.row(i).transpose()) - s.coords.row(i).transpose()).norm() <= 1e-10);
}

TEST_CASE("correlate_distances") {
  CounterRng rng(19);
  const SimilaritySpace s = build_space(catalog_from(gaussian_matrix(40, 12, rng)), {10, 5, 0});

  DistanceRatings exact(0.0, 2.0), negated(-10.0, 10.0);
  for (int i = 0; i < 10; ++i) {
    const double d = s.dist(i, i + 1);
    exact.add(s.ids[i], s.ids[i + 1], d);
    negated.add(s.ids[i + 1], s.ids[i], 3.0 - 2.0 * d);
  }
  CHECK(correlate_distances(s, exact).pearson == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(correlate_distances(s, negated).pearson == doctest::Approx(-1.0).epsilon(1e-12));

  DistanceRatings noisy(-5.0, 10.0);
  std::vector<double> fx, fy;
  int added = 0;
  while (added < 50) {
    const auto i = static_cast<int>(rng.below(40));
    const auto j = static_cast<int>(rng.below(40));
    if (i == j) continue;
    const double r = s.dist(i, j) + 0.3 * rng.normal();
    try {
      noisy.add(s.ids[i], s.ids[j], r);
    } catch (const Error&) {
      continue;
    }
    fx.push_back(s.dist(i, j));
    fy.push_back(r);
    ++added;
  }
  noisy.add("ghost", s.ids[0], 1.0);
  // Textbook Pearson via sums of products.
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double n = 50;
  for (int k = 0; k < 50; ++k) {
    sx += fx[k];
    sy += fy[k];
    sxx += fx[k] * fx[k];
    syy += fy[k] * fy[k];
    sxy += fx[k] * fy[k];
  }
  const double oracle = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  const DistanceCorrelation c = correlate_distances(s, noisy);
  CHECK(c.used == 50);
  CHECK(c.skipped == 1);
  CHECK(std::abs(c.pearson - oracle) <= 1e-12);

  DistanceRatings few(0, 2);
  few.add(s.ids[0], s.ids[1], 0.5);
  few.add(s.ids[0], s.ids[2], 0.7);
  CHECK_THROWS_AS(correlate_distances(s, few), Error);
  DistanceRatings flat(0, 2);
  for (int i = 0; i < 5; ++i) flat.add(s.ids[i], s.ids[i + 10], 1.0);
  CHECK_THROWS_AS(correlate_distances(s, flat), Error);
  CHECK_THROWS_AS(flat.add(s.ids[10], s.ids[0], 1.0), Error);
  CHECK_THROWS_AS(flat.add(s.ids[20], s.ids[21], 3.0), Error);
}
