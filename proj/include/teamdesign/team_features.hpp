#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/match.hpp"
#include "teamdesign/roster.hpp"

namespace teamdesign {

inline constexpr std::size_t kFeatureCount = 10;

/// Column order used everywhere features are exported or modeled.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "mean_proficiency",    "mean_generality",          "congruency",
    "diversity",           "min_champ_distance",       "max_champ_distance",
    "starting_bottom",     "background_diversity",     "min_background_diversity",
    "max_background_diversity"};

std::optional<std::size_t> feature_column(std::string_view name);

struct TeamFeatureVector {
  double mean_proficiency = 0;
  double mean_generality = 0;
  double congruency = 0;
  double diversity = 0;
  double min_champ_distance = 0;
  double max_champ_distance = 0;
  double starting_bottom = 0;
  double background_diversity = 0;
  double min_background_diversity = 0;
  double max_background_diversity = 0;

  std::array<double, kFeatureCount> values() const;
  static TeamFeatureVector from_values(std::span<const double> v);
  double operator[](std::size_t column) const { return values()[column]; }
  bool operator==(const TeamFeatureVector&) const = default;
};

struct DistanceStats {
  double mean = 0;
  double min = 0;
  double max = 0;
};

enum class ProficiencyBasis { PrincipalComponents, RawFeatures };

struct FeatureOptions {
  ProficiencyBasis basis = ProficiencyBasis::PrincipalComponents;
  /// Required when basis is RawFeatures.
  const ChampionCatalog* catalog = nullptr;
  /// Exclude the current match's pick from the history before taking the
  /// most-picked champion.
  bool leave_one_out = false;
};

double proficiency(const SimilaritySpace& space, const PlayerHistory& history, const ChampionId& champion,
                   const FeatureOptions& options = {});

/// Number of distinct functional clusters covered by the champions.
int congruency(const SimilaritySpace& space, std::span<const ChampionId> champions);

/// Mean/min/max pairwise cosine distance.
DistanceStats diversity(const SimilaritySpace& space, std::span<const ChampionId> champions);

/// Diversity over the players' most-picked champions (which may coincide).
DistanceStats background_diversity(const SimilaritySpace& space, std::span<const PlayerHistory> histories);

/// Per-slot values used by team_features and the pick-order analyses.
struct SlotValues {
  double proficiency = 0;
  double generality = 0;
  ChampionId most_picked;
};

std::array<SlotValues, kTeamSize> slot_values(const SimilaritySpace& space, const TeamRecord& team,
                                              const HistoryIndex& histories, const FeatureOptions& options = {});

TeamFeatureVector team_features(const SimilaritySpace& space, const MatchRecord& match, Side side,
                                const HistoryIndex& histories, const FeatureOptions& options = {});

/// Same features for an arbitrary five-champion assignment (used by the
/// draft engine to score hypothetical teams).
TeamFeatureVector team_features(const SimilaritySpace& space, std::span<const ChampionId> champions,
                                std::span<const PlayerHistory> histories, Side side,
                                const FeatureOptions& options = {});

}  // namespace teamdesign
