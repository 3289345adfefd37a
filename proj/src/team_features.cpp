#include "teamdesign/team_features.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace teamdesign {

std::optional<std::size_t> feature_column(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i)
    if (kFeatureNames[i] == name) return i;
  return std::nullopt;
}

std::array<double, kFeatureCount> TeamFeatureVector::values() const {
  return {mean_proficiency,     mean_generality, congruency,           diversity,
          min_champ_distance,   max_champ_distance, starting_bottom,   background_diversity,
          min_background_diversity, max_background_diversity};
}

TeamFeatureVector TeamFeatureVector::from_values(std::span<const double> v) {
  if (v.size() != kFeatureCount) throw invalid_argument("feature vector needs 10 values");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8], v[9]};
}

namespace {

Eigen::VectorXd standardized_raw(const SimilaritySpace& space, const ChampionCatalog& catalog,
                                 const ChampionId& id) {
  std::size_t row = space.index_of(id);
  if (row >= catalog.ids.size() || catalog.ids[row] != id) {
    auto it = std::find(catalog.ids.begin(), catalog.ids.end(), id);
    if (it == catalog.ids.end()) throw not_found("champion missing from catalog: " + id);
    row = static_cast<std::size_t>(it - catalog.ids.begin());
  }
  Eigen::VectorXd z = (catalog.features.row(row).transpose() - space.mean).cwiseQuotient(space.std);
  for (int c : space.dropped_columns) z[c] = 0.0;
  return z;
}

DistanceStats pairwise(const SimilaritySpace& space, std::span<const std::size_t> rows) {
  if (rows.size() < 2) throw invalid_argument("diversity needs at least two champions");
  DistanceStats s{0.0, std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  int pairs = 0;
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = a + 1; b < rows.size(); ++b) {
      const double d = space.dist(rows[a], rows[b]);
      s.mean += d;
      s.min = std::min(s.min, d);
      s.max = std::max(s.max, d);
      ++pairs;
    }
  s.mean /= pairs;
  // Keep min <= mean <= max despite summation rounding.
  s.mean = std::clamp(s.mean, s.min, s.max);
  return s;
}

}  // namespace

double proficiency(const SimilaritySpace& space, const PlayerHistory& history, const ChampionId& champion,
                   const FeatureOptions& options) {
  const PlayerHistory& h = options.leave_one_out ? history.without_pick(champion) : history;
  const ChampionId main = most_picked(h);
  if (options.basis == ProficiencyBasis::RawFeatures) {
    if (!options.catalog) throw invalid_argument("raw-feature proficiency needs the catalog");
    if (main == champion) return 1.0;
    return cosine_similarity(standardized_raw(space, *options.catalog, main),
                             standardized_raw(space, *options.catalog, champion));
  }
  return champ_similarity(space, main, champion);
}

int congruency(const SimilaritySpace& space, std::span<const ChampionId> champions) {
  std::set<int> covered;
  for (const auto& c : champions) covered.insert(space.cluster_of(c));
  return static_cast<int>(covered.size());
}

DistanceStats diversity(const SimilaritySpace& space, std::span<const ChampionId> champions) {
  std::vector<std::size_t> rows;
  rows.reserve(champions.size());
  for (const auto& c : champions) rows.push_back(space.index_of(c));
  return pairwise(space, rows);
}

DistanceStats background_diversity(const SimilaritySpace& space, std::span<const PlayerHistory> histories) {
  std::vector<std::size_t> rows;
  rows.reserve(histories.size());
  for (const auto& h : histories) rows.push_back(space.index_of(most_picked(h)));
  return pairwise(space, rows);
}

std::array<SlotValues, kTeamSize> slot_values(const SimilaritySpace& space, const TeamRecord& team,
                                              const HistoryIndex& histories, const FeatureOptions& options) {
  std::array<SlotValues, kTeamSize> out;
  for (int i = 0; i < kTeamSize; ++i) {
    const auto& slot = team.slots[i];
    try {
      const PlayerHistory& h = require_history(histories, slot.player);
      out[i].proficiency = proficiency(space, h, slot.champion, options);
      out[i].generality = generality(h);
      out[i].most_picked = most_picked(h);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(to_string(team.side)) + " team slot " + std::to_string(i + 1) + " (" +
                                slot.player + "): " + e.what());
    }
  }
  return out;
}

TeamFeatureVector team_features(const SimilaritySpace& space, const MatchRecord& match, Side side,
                                const HistoryIndex& histories, const FeatureOptions& options) {
  const TeamRecord& team = match.teams[match.team_on(side)];
  std::array<ChampionId, kTeamSize> champions;
  std::array<PlayerHistory, kTeamSize> team_histories;
  for (int i = 0; i < kTeamSize; ++i) {
    champions[i] = team.slots[i].champion;
    try {
      team_histories[i] = require_history(histories, team.slots[i].player);
    } catch (const Error& e) {
      throw Error(e.kind(), "match " + match.match_id + " " + std::string(to_string(side)) + " team slot " +
                                std::to_string(i + 1) + ": " + e.what());
    }
  }
  try {
    return team_features(space, champions, team_histories, side, options);
  } catch (const Error& e) {
    throw Error(e.kind(), "match " + match.match_id + " " + std::string(to_string(side)) + " team: " + e.what());
  }
}

TeamFeatureVector team_features(const SimilaritySpace& space, std::span<const ChampionId> champions,
                                std::span<const PlayerHistory> histories, Side side,
                                const FeatureOptions& options) {
  if (champions.size() != histories.size() || champions.empty())
    throw invalid_argument("team needs one history per champion");
  TeamFeatureVector f;
  std::vector<PlayerHistory> mains;
  mains.reserve(histories.size());
  for (std::size_t i = 0; i < champions.size(); ++i) {
    try {
      f.mean_proficiency += proficiency(space, histories[i], champions[i], options);
      f.mean_generality += generality(histories[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), "slot " + std::to_string(i + 1) + " (" + histories[i].player_id + "): " + e.what());
    }
    mains.push_back(options.leave_one_out ? histories[i].without_pick(champions[i]) : histories[i]);
  }
  const double n = static_cast<double>(champions.size());
  f.mean_proficiency /= n;
  f.mean_generality /= n;
  f.congruency = congruency(space, champions);
  const DistanceStats d = diversity(space, champions);
  f.diversity = d.mean;
  f.min_champ_distance = d.min;
  f.max_champ_distance = d.max;
  f.starting_bottom = side == Side::Bottom ? 1.0 : 0.0;
  const DistanceStats bd = background_diversity(space, mains);
  f.background_diversity = bd.mean;
  f.min_background_diversity = bd.min;
  f.max_background_diversity = bd.max;
  return f;
}

}  // namespace teamdesign
