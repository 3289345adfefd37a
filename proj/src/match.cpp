#include "teamdesign/match.hpp"

#include <algorithm>
#include <set>

namespace teamdesign {

int MatchRecord::team_of(const PlayerId& player) const {
  for (int t = 0; t < 2; ++t)
    for (const auto& slot : teams[t].slots)
      if (slot.player == player) return t;
  return -1;
}

const TeamSlot* MatchRecord::slot_of(const PlayerId& player) const {
  for (const auto& team : teams)
    for (const auto& slot : team.slots)
      if (slot.player == player) return &slot;
  return nullptr;
}

void validate(const MatchRecord& match) {
  const auto fail = [&](const std::string& why) { throw data_error("match " + match.match_id + ": " + why); };
  if (match.match_id.empty()) throw data_error("match without id");
  const bool top_tier = match.tier == Tier::Master || match.tier == Tier::Challenger;
  if (match.division < 1 || match.division > 5 || (top_tier && match.division != 1))
    fail("invalid division " + std::to_string(match.division));
  if (match.teams[0].side == match.teams[1].side) fail("both teams on the same side");
  if (match.teams[0].outcome == match.teams[1].outcome) fail("exactly one team must win");

  std::set<PlayerId> players;
  std::set<ChampionId> champions;
  for (const auto& team : match.teams) {
    std::array<bool, kTeamSize> seen{};
    for (const auto& slot : team.slots) {
      if (slot.player.empty() || slot.champion.empty()) fail("empty player or champion");
      if (!players.insert(slot.player).second) fail("player appears twice: " + slot.player);
      if (!champions.insert(slot.champion).second) fail("champion appears twice: " + slot.champion);
      if (slot.pick_index < 1 || slot.pick_index > kTeamSize || seen[slot.pick_index - 1])
        fail("pick indices must be a permutation of 1..5");
      seen[slot.pick_index - 1] = true;
    }
  }
}

}  // namespace teamdesign
