#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/match.hpp"
#include "teamdesign/roster.hpp"
#include "teamdesign/team_features.hpp"

namespace teamdesign {

using TierArray = std::array<double, kTierCount>;

/// Knobs for a synthetic corpus. Per-tier arrays are indexed Bronze..Challenger.
struct GeneratorConfig {
  // catalog
  int n_champions = 126;
  int feature_dim = 40;
  int n_clusters = 5;
  double cluster_separation = 20.0;  // in units of the within-cluster sd

  // players
  int n_players = 2000;
  TierArray tier_mix{0.15, 0.25, 0.25, 0.15, 0.10, 0.05, 0.05};
  /// Dirichlet concentration of each player's preference over their
  /// champion pool. Small values make specialists, large ones generalists.
  TierArray preference_concentration{0.6, 0.5, 0.4, 0.35, 0.3, 0.4, 0.5};
  int champions_per_player = 10;
  /// Share of a player's pool drawn from their home cluster.
  double role_focus = 0.6;
  /// Relative popularity of clusters as a home role; empty means uniform.
  std::vector<double> cluster_popularity{0.4, 0.2, 0.15, 0.15, 0.1};
  int picks_per_player = 60;

  // champion select
  /// A team's focus is drawn from U(mean - spread, mean + spread), clipped
  /// to [0,1]. Each focused pick plays to strength, the rest are fill picks.
  TierArray focus_mean{0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75};
  double focus_spread = 0.25;
  /// Probability that a team fills uncovered clusters instead of picking
  /// mains greedily.
  TierArray coordination{0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0};
  /// Tiers whose fifth picker may not take their most-picked champion.
  std::array<bool, kTierCount> fifth_pick_off_main{};
  int bans_per_team = 3;

  // outcomes
  int n_matches = 10000;
  /// Weights on standardized team-feature differences (bottom minus top).
  /// The side effect is set through bottom_side_rate instead.
  std::map<std::string, double> planted_beta{
      {"mean_proficiency", 0.5}, {"congruency", 0.22}, {"diversity", 0.06}, {"mean_generality", 0.03}};
  double bottom_side_rate = 0.508;
  /// Opponents sampled per team when estimating the team-level Bayes rate.
  int bayes_samples = 512;

  int space_components = 10;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidArgument) naming the first bad field.
  void validate() const;
};

struct SyntheticCatalog {
  ChampionCatalog catalog;
  std::vector<int> planted_labels;  // 1-based, one per champion
};

/// Gaussian blobs with centers on random orthonormal directions, pairwise
/// `cluster_separation` apart.
SyntheticCatalog gen_catalog(const GeneratorConfig& config);

struct SyntheticPlayer {
  PlayerHistory history;
  std::vector<ChampionId> pool;  // preference order, most preferred first
  std::vector<double> weights;   // matching preference probabilities
  int home_cluster = 1;
};

std::vector<SyntheticPlayer> gen_players(const GeneratorConfig& config, const SimilaritySpace& space);

struct MatchTruth {
  std::string match_id;
  double p_bottom = 0.5;  // true probability the bottom team wins
  double q_bottom = 0.5;  // win probability given only the bottom team's own features
  double q_top = 0.5;     // same for the top team

  bool operator==(const MatchTruth&) const = default;
};

/// Ground truth recorded alongside a generated corpus.
struct GroundTruth {
  std::map<std::string, double> planted_beta;
  double bottom_side_rate = 0.5;
  double side_offset = 0.0;  // logit shift favouring the bottom side
  std::array<double, kFeatureNames.size()> feature_mean{};
  std::array<double, kFeatureNames.size()> feature_std{};
  /// Expected accuracy of the true match-level probabilities.
  double match_bayes_accuracy = 0.5;
  /// Expected accuracy of the best classifier that sees one team's features.
  double team_bayes_accuracy = 0.5;
  std::vector<int> planted_labels;
  std::vector<MatchTruth> matches;

  bool operator==(const GroundTruth&) const = default;
};

struct GeneratedMatches {
  std::vector<MatchRecord> matches;
  GroundTruth truth;
};

GeneratedMatches gen_matches(const GeneratorConfig& config, const SimilaritySpace& space,
                             const std::vector<SyntheticPlayer>& players);

struct SyntheticCorpus {
  GeneratorConfig config;
  SyntheticCatalog catalog;
  SimilaritySpace space;
  std::vector<SyntheticPlayer> players;
  std::vector<MatchRecord> matches;
  GroundTruth truth;

  HistoryIndex histories() const;
};

/// Catalog, space, players and matches in one call.
SyntheticCorpus generate(const GeneratorConfig& config);

/// Logit offset g with mean sigmoid(score + g) equal to `rate`.
double calibrate_offset(std::span<const double> scores, double rate);

}  // namespace teamdesign
