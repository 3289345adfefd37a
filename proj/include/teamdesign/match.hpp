#pragma once

#include <array>
#include <string>

#include "teamdesign/types.hpp"

namespace teamdesign {

struct TeamSlot {
  PlayerId player;
  ChampionId champion;
  int pick_index = 0;  // 1..5 within the team

  bool operator==(const TeamSlot&) const = default;
};

struct TeamRecord {
  Side side = Side::Top;
  std::array<TeamSlot, kTeamSize> slots;
  Outcome outcome = Outcome::Loss;

  bool operator==(const TeamRecord&) const = default;
};

struct MatchRecord {
  std::string match_id;
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
  int division = 1;
  std::array<TeamRecord, 2> teams;

  bool operator==(const MatchRecord&) const = default;

  /// Index (0/1) of the team on `side`.
  int team_on(Side side) const { return teams[0].side == side ? 0 : 1; }
  /// Team index the player belongs to, or -1.
  int team_of(const PlayerId& player) const;
  const TeamSlot* slot_of(const PlayerId& player) const;
};

/// Throws Error(Data) describing the first violated record invariant.
void validate(const MatchRecord& match);

}  // namespace teamdesign
