#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/roster.hpp"
#include "teamdesign/team_features.hpp"
#include "teamdesign/win_model.hpp"

namespace teamdesign {

enum class Phase { Ban, Pick, Trade, Complete };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

/// Teams are indexed 0 ("A") and 1 ("B").
inline char team_letter(int team) { return team == 0 ? 'A' : 'B'; }

/// Turn order for champion select. Bans are listed by acting team; picks by
/// (team, position in that team's randomized pick order, 1-based).
struct DraftConfig {
  std::vector<int> ban_sequence{0, 1, 0, 1, 0, 1};
  std::vector<std::pair<int, int>> pick_sequence{{0, 1}, {1, 1}, {1, 2}, {0, 2}, {0, 3},
                                                 {1, 3}, {1, 4}, {0, 4}, {0, 5}, {1, 5}};

  static DraftConfig snake() { return {}; }
  static DraftConfig alternating();
  /// Throws Error(InvalidArgument) unless each team gets positions 1..5 once.
  void validate() const;
  bool operator==(const DraftConfig&) const = default;
};

struct DraftAction {
  enum class Kind { Ban, Pick, Swap, Finalize };

  Kind kind = Kind::Finalize;
  int team = 0;
  ChampionId champion;  // Ban, Pick
  int slot_a = 0;       // Swap
  int slot_b = 0;       // Swap

  static DraftAction ban(int team, ChampionId c) { return {Kind::Ban, team, std::move(c), 0, 0}; }
  static DraftAction pick(int team, ChampionId c) { return {Kind::Pick, team, std::move(c), 0, 0}; }
  static DraftAction swap(int team, int a, int b) { return {Kind::Swap, team, {}, std::min(a, b), std::max(a, b)}; }
  static DraftAction finalize() { return {}; }

  bool operator==(const DraftAction&) const = default;
};

std::string_view to_string(DraftAction::Kind k);
std::optional<DraftAction::Kind> parse_action_kind(std::string_view s);
std::string describe(const DraftAction& a);

using TeamRoster = std::array<PlayerHistory, kTeamSize>;

/// Immutable snapshot of a champion-select session.
struct DraftState {
  Phase phase = Phase::Ban;
  DraftConfig config;
  std::uint64_t seed = 0;
  std::vector<ChampionId> champions_in_play;  // pool at creation, sorted
  std::set<ChampionId> pool;
  std::array<std::vector<ChampionId>, 2> bans;
  std::array<std::array<std::optional<ChampionId>, kTeamSize>, 2> picks;  // by slot
  std::array<TeamRoster, 2> rosters;
  std::array<Side, 2> sides{Side::Bottom, Side::Top};
  /// pick_order[team][position - 1] = slot
  std::array<std::array<int, kTeamSize>, 2> pick_order{};
  std::size_t ban_cursor = 0;
  std::size_t turn_cursor = 0;

  bool operator==(const DraftState&) const = default;

  /// Team whose turn it is in Ban or Pick.
  std::optional<int> acting_team() const;
  /// Slot of the acting player (first picker during bans).
  std::optional<int> acting_slot() const;
  /// Pick position (1..5) of a slot within its team.
  int pick_position(int team, int slot) const;
  int picks_made(int team) const;
};

struct IllegalAction : Error {
  explicit IllegalAction(const std::string& reason) : Error(Kind::Illegal, reason) {}
};

/// Ten distinct players with usable histories, a pool large enough for all
/// bans and picks, opposite sides.
DraftState new_draft(std::span<const ChampionId> pool, const std::array<TeamRoster, 2>& rosters,
                     std::array<Side, 2> sides, std::uint64_t seed, const DraftConfig& config = {});

std::vector<DraftAction> legal_actions(const DraftState& state);

/// Returns the successor state; throws IllegalAction and leaves `state`
/// untouched otherwise.
DraftState apply_action(const DraftState& state, const DraftAction& action);

/// Throws Error(Data) describing the first violated invariant.
void check_invariants(const DraftState& state);

/// Player credited with an action in the log.
std::string actor_of(const DraftState& state, const DraftAction& action);

DraftState replay(DraftState initial, std::span<const DraftAction> actions);

// --- recommendations -------------------------------------------------------

struct Candidate {
  ChampionId champion;
  double win_probability = 0.0;
  double proficiency_component = 0.0;
  int congruency_after = 0;
  double diversity_after = 0.0;
  std::string explanation;

  bool operator==(const Candidate&) const = default;
};

struct Recommendation {
  int team = 0;
  int slot = 0;
  std::vector<Candidate> candidates;

  bool operator==(const Recommendation&) const = default;
};

/// Fills the acting team's empty slots so a full-team model can score a
/// tentative pick.
class ImputationStrategy {
 public:
  virtual ~ImputationStrategy() = default;
  virtual std::array<ChampionId, kTeamSize> complete(const DraftState& state, const SimilaritySpace& space, int team,
                                                     int slot, const ChampionId& candidate) const = 0;
};

/// Each unfilled teammate, in slot order, takes their most-picked champion if
/// still available, else the available champion most similar to it.
class MostPickedImputation : public ImputationStrategy {
 public:
  std::array<ChampionId, kTeamSize> complete(const DraftState& state, const SimilaritySpace& space, int team,
                                             int slot, const ChampionId& candidate) const override;
};

Recommendation recommend(const DraftState& state, const WinModel& model, const SimilaritySpace& space,
                         std::size_t top_n, const ImputationStrategy* strategy = nullptr,
                         const FeatureOptions& options = {});

struct TradePlan {
  int team = 0;
  std::array<ChampionId, kTeamSize> assignment;  // by slot
  double current_mean_proficiency = 0.0;
  double optimal_mean_proficiency = 0.0;
  double mean_proficiency_gain = 0.0;
  std::vector<std::pair<int, int>> swaps;  // applying these in order realizes the assignment

  bool operator==(const TradePlan&) const = default;
};

/// Exact proficiency-maximizing reassignment of a team's five picks, by
/// exhaustive search over the 120 permutations. Ties prefer fewer swaps, then
/// the lexicographically smallest assignment.
TradePlan optimize_trades(const DraftState& state, const SimilaritySpace& space, int team,
                          const FeatureOptions& options = {});

}  // namespace teamdesign
