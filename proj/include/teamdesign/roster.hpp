#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>

#include "teamdesign/match.hpp"
#include "teamdesign/types.hpp"

namespace teamdesign {

/// A player's champion-selection counts over a window of matches.
struct PlayerHistory {
  PlayerId player_id;
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
  int division = 1;
  std::map<ChampionId, int> picks;  // C_{u,i} >= 1
  int total = 0;                    // C_u

  bool usable() const { return total >= 1; }
  bool operator==(const PlayerHistory&) const = default;

  /// New history with one more pick of `champion`.
  PlayerHistory with_pick(const ChampionId& champion) const;
  /// New history with one pick of `champion` removed (leave-one-out).
  PlayerHistory without_pick(const ChampionId& champion) const;
};

using HistoryIndex = std::unordered_map<PlayerId, PlayerHistory>;

struct HistoryOptions {
  /// Only the most recent `window` matches containing the player count.
  std::optional<std::size_t> window;
};

/// Matches are taken to be in chronological order.
PlayerHistory build_history(std::span<const MatchRecord> matches, const PlayerId& player,
                            const HistoryOptions& options = {});

/// Histories for every player appearing in `matches`.
HistoryIndex build_histories(std::span<const MatchRecord> matches, const HistoryOptions& options = {});

/// Most-picked champion; ties go to the lexicographically smallest id.
/// Throws Error(Data) for an unusable history.
const ChampionId& most_picked(const PlayerHistory& history);

/// Shannon entropy (natural log) of the pick distribution.
double generality(const PlayerHistory& history);

/// Throws Error(Data) if the player is absent or unusable.
const PlayerHistory& require_history(const HistoryIndex& histories, const PlayerId& player);

}  // namespace teamdesign
