#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "doctest.h"
#include "support.hpp"
#include "teamdesign/team_features.hpp"

using namespace teamdesign;
using namespace testsupport;

namespace {

PlayerHistory history(const PlayerId& id, std::map<ChampionId, int> picks) {
  PlayerHistory h;
  h.player_id = id;
  for (const auto& [c, n] : picks) h.total += n;
  h.picks = std::move(picks);
  return h;
}

// Champions C000..C004 along +e_k (cluster k+1), C005..C009 along -e_k
// (cluster k+1), C010.. random.
SimilaritySpace axis_space(int extra, std::uint64_t seed) {
  CounterRng rng(seed);
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(10 + extra, 5);
  std::vector<int> clusters;
  for (int k = 0; k < 5; ++k) coords(k, k) = 1.0 + k;
  for (int k = 0; k < 5; ++k) coords(5 + k, k) = -2.0;
  for (int k = 0; k < 10; ++k) clusters.push_back(k % 5 + 1);
  for (int i = 0; i < extra; ++i) {
    for (int j = 0; j < 5; ++j) coords(10 + i, j) = rng.normal();
    clusters.push_back(1 + static_cast<int>(rng.below(5)));
  }
  return space_from_coords(coords, clusters);
}

MatchRecord make_match(const std::array<ChampionId, 10>& champs) {
  MatchRecord m;
  m.match_id = "m";
  m.teams[0].side = Side::Bottom;
  m.teams[0].outcome = Outcome::Win;
  m.teams[1].side = Side::Top;
  m.teams[1].outcome = Outcome::Loss;
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 5; ++s) m.teams[t].slots[s] = {"p" + std::to_string(t * 5 + s), champs[t * 5 + s], s + 1};
  return m;
}

}  // namespace

TEST_CASE("proficiency endpoints") {
  const SimilaritySpace s = axis_space(0, 1);
  const PlayerHistory h = history("u", {{"C000", 10}, {"C001", 3}});
  CHECK(proficiency(s, h, "C000") == 1.0);
  CHECK(proficiency(s, h, "C005") == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(proficiency(s, h, "C003") == 0.0);
  CHECK_THROWS_AS(proficiency(s, h, "nope"), Error);
  CHECK_THROWS_AS(proficiency(s, PlayerHistory{}, "C000"), Error);
}

TEST_CASE("leave-one-out proficiency excludes the current pick") {
  const SimilaritySpace s = axis_space(0, 1);
  const PlayerHistory h = history("u", {{"C000", 2}, {"C001", 2}});
  CHECK(proficiency(s, h, "C001") == 0.0);  // tie goes to C000
  FeatureOptions loo;
  loo.leave_one_out = true;
  CHECK(proficiency(s, h, "C000", loo) == 0.0);  // C001 becomes most picked
  CHECK_THROWS_AS(proficiency(s, history("v", {{"C000", 1}}), "C000", loo), Error);
}

TEST_CASE("raw-feature proficiency switch") {
  CounterRng rng(3);
  const ChampionCatalog cat = catalog_from(gaussian_matrix(20, 6, rng));
  const SimilaritySpace s = build_space(cat, {6, 3, 0});
  FeatureOptions raw;
  raw.basis = ProficiencyBasis::RawFeatures;
  raw.catalog = &cat;
  const PlayerHistory h = history("u", {{"C004", 3}});
  // With all components retained the PCA rotation preserves cosines.
  for (int i = 0; i < 20; ++i)
    CHECK(proficiency(s, h, champ_name(i), raw) == doctest::Approx(proficiency(s, h, champ_name(i))).epsilon(1e-9));
  raw.catalog = nullptr;
  CHECK_THROWS_AS(proficiency(s, h, "C001", raw), Error);
}

TEST_CASE("congruency") {
  const SimilaritySpace s = axis_space(0, 1);
  const std::vector<ChampionId> all{"C000", "C001", "C002", "C003", "C004"};
  CHECK(congruency(s, all) == 5);
  // C000 and C005 share cluster 1, etc.
  const std::vector<ChampionId> two{"C000", "C005", "C001", "C006", "C003"};
  CHECK(congruency(s, two) == 3);

  Eigen::MatrixXd coords = Eigen::MatrixXd::Identity(6, 6);
  const SimilaritySpace mono = space_from_coords(coords, {1, 1, 1, 1, 1, 2});
  const std::vector<ChampionId> same{"C000", "C001", "C002", "C003", "C004"};
  CHECK(congruency(mono, same) == 1);
  CHECK_THROWS_AS(congruency(s, std::vector<ChampionId>{"C000", "bad"}), Error);
}

TEST_CASE("diversity endpoints") {
  Eigen::MatrixXd coords(6, 2);
  coords << 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, -1, 0;
  const SimilaritySpace same = space_from_coords(coords, {1, 1, 1, 1, 1, 2});
  const std::vector<ChampionId> five{"C000", "C001", "C002", "C003", "C004"};
  const DistanceStats d0 = diversity(same, five);
  CHECK(d0.mean == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d0.min == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(d0.max == doctest::Approx(0.0).epsilon(1e-15));

  const SimilaritySpace s = axis_space(0, 1);
  const DistanceStats d1 = diversity(s, std::vector<ChampionId>{"C000", "C001", "C002", "C003", "C004"});
  CHECK(d1.mean == 1.0);
  CHECK(d1.min == 1.0);
  CHECK(d1.max == 1.0);
}

TEST_CASE("background diversity endpoints") {
  const SimilaritySpace s = axis_space(0, 1);
  std::vector<PlayerHistory> shared, orth;
  for (int i = 0; i < 5; ++i) {
    shared.push_back(history("p" + std::to_string(i), {{"C002", 4}, {champ_name(i), 1}}));
    orth.push_back(history("q" + std::to_string(i), {{champ_name(i), 4}}));
  }
  const DistanceStats a = background_diversity(s, shared);
  CHECK(a.mean == 0.0);
  CHECK(a.max == 0.0);
  const DistanceStats b = background_diversity(s, orth);
  CHECK(b.mean == 1.0);
  CHECK(b.min == 1.0);
  CHECK(b.max == 1.0);
  orth[2] = PlayerHistory{};
  CHECK_THROWS_AS(background_diversity(s, orth), Error);
}

TEST_CASE("team_features composes the per-metric cases") {
  const SimilaritySpace s = axis_space(0, 1);
  HistoryIndex hs;
  for (int i = 0; i < 10; ++i) hs["p" + std::to_string(i)] = history("p" + std::to_string(i), {{champ_name(i), 5}});
  MatchRecord m = make_match({"C000", "C001", "C002", "C003", "C004", "C005", "C006", "C007", "C008", "C009"});
  const TeamFeatureVector bottom = team_features(s, m, Side::Bottom, hs);
  CHECK(bottom.mean_proficiency == 1.0);
  CHECK(bottom.mean_generality == 0.0);
  CHECK(bottom.congruency == 5);
  CHECK(bottom.diversity == 1.0);
  CHECK(bottom.starting_bottom == 1.0);
  CHECK(bottom.background_diversity == 1.0);
  CHECK(team_features(s, m, Side::Top, hs).starting_bottom == 0.0);

  hs.erase("p7");
  CHECK_THROWS_WITH_AS(team_features(s, m, Side::Top, hs), doctest::Contains("slot 3"), Error);
}

TEST_CASE("metric oracle over random teams") {
  CounterRng rng(2024);
  const ChampionCatalog cat = catalog_from(gaussian_matrix(60, 16, rng));
  const SimilaritySpace s = build_space(cat, {10, 5, 4});
  const auto coord = [&](const ChampionId& id) -> Eigen::VectorXd { return s.coords.row(s.index_of(id)); };

  for (int trial = 0; trial < 300; ++trial) {
    std::vector<int> perm(60);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<int>(perm));
    std::array<ChampionId, 10> champs;
    for (int i = 0; i < 10; ++i) champs[i] = champ_name(perm[i]);
    const MatchRecord m = make_match(champs);
    HistoryIndex hs;
    for (int p = 0; p < 10; ++p) {
      std::map<ChampionId, int> picks;
      const int k = 1 + static_cast<int>(rng.below(6));
      for (int j = 0; j < k; ++j) picks[champ_name(static_cast<int>(rng.below(60)))] += 1 + static_cast<int>(rng.below(8));
      hs["p" + std::to_string(p)] = history("p" + std::to_string(p), picks);
    }
    for (Side side : {Side::Bottom, Side::Top}) {
      const TeamRecord& team = m.teams[m.team_on(side)];
      const TeamFeatureVector f = team_features(s, m, side, hs);
      double prof = 0, gen = 0;
      std::vector<Eigen::VectorXd> picked, mains;
      std::set<int> clusters;
      for (const auto& slot : team.slots) {
        const auto& h = hs.at(slot.player);
        ChampionId main;
        int best = 0;
        for (const auto& [c, n] : h.picks)
          if (n > best) best = n, main = c;
        prof += cosine_oracle(coord(main), coord(slot.champion));
        for (const auto& [c, n] : h.picks) gen -= (double(n) / h.total) * std::log(double(n) / h.total);
        picked.push_back(coord(slot.champion));
        mains.push_back(coord(main));
        clusters.insert(s.cluster[s.index_of(slot.champion)]);
      }
      auto loop = [](const std::vector<Eigen::VectorXd>& v, double& mean, double& lo, double& hi) {
        mean = 0, lo = 9, hi = -9;
        for (int a = 0; a < 5; ++a)
          for (int b = a + 1; b < 5; ++b) {
            const double d = 1.0 - cosine_oracle(v[a], v[b]);
            mean += d / 10.0;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
          }
      };
      double dm, dl, dh, bm, bl, bh;
      loop(picked, dm, dl, dh);
      loop(mains, bm, bl, bh);
      CHECK(std::abs(f.mean_proficiency - prof / 5) <= 1e-12);
      CHECK(std::abs(f.mean_generality - gen / 5) <= 1e-12);
      CHECK(f.congruency == static_cast<double>(clusters.size()));
      CHECK(std::abs(f.diversity - dm) <= 1e-12);
      CHECK(std::abs(f.min_champ_distance - dl) <= 1e-12);
      CHECK(std::abs(f.max_champ_distance - dh) <= 1e-12);
      CHECK(std::abs(f.background_diversity - bm) <= 1e-12);
      CHECK(std::abs(f.min_background_diversity - bl) <= 1e-12);
      CHECK(std::abs(f.max_background_diversity - bh) <= 1e-12);
      CHECK(f.min_champ_distance <= f.diversity);
      CHECK(f.diversity <= f.max_champ_distance);

      // Slot order does not matter and results are bit-identical.
      MatchRecord shuffled = m;
      auto& slots = shuffled.teams[shuffled.team_on(side)].slots;
      std::reverse(slots.begin(), slots.end());
      const TeamFeatureVector g = team_features(s, shuffled, side, hs);
      CHECK(g.congruency == f.congruency);
      CHECK(g.mean_proficiency == doctest::Approx(f.mean_proficiency).epsilon(1e-14));
      CHECK(team_features(s, m, side, hs) == f);
    }
  }
}

TEST_CASE("feature column names") {
  CHECK(feature_column("congruency") == 2u);
  CHECK_FALSE(feature_column("kills").has_value());
  TeamFeatureVector f;
  f.diversity = 0.3;
  CHECK(TeamFeatureVector::from_values(f.values()) == f);
  CHECK(f[3] == 0.3);
}
