#include "teamdesign/roster.hpp"

#include <cmath>
#include <deque>

namespace teamdesign {

PlayerHistory PlayerHistory::with_pick(const ChampionId& champion) const {
  PlayerHistory next = *this;
  ++next.picks[champion];
  ++next.total;
  return next;
}

PlayerHistory PlayerHistory::without_pick(const ChampionId& champion) const {
  PlayerHistory next = *this;
  auto it = next.picks.find(champion);
  if (it == next.picks.end()) return next;
  if (--it->second == 0) next.picks.erase(it);
  --next.total;
  return next;
}

namespace {

void record(PlayerHistory& h, const MatchRecord& m, const ChampionId& champion) {
  h.region = m.region;
  h.tier = m.tier;
  h.division = m.division;
  ++h.picks[champion];
  ++h.total;
}

}  // namespace

PlayerHistory build_history(std::span<const MatchRecord> matches, const PlayerId& player,
                            const HistoryOptions& options) {
  std::deque<std::pair<const MatchRecord*, ChampionId>> window;
  for (const auto& m : matches) {
    const TeamSlot* slot = m.slot_of(player);
    if (!slot) continue;
    window.emplace_back(&m, slot->champion);
    if (options.window && window.size() > *options.window) window.pop_front();
  }
  PlayerHistory h;
  h.player_id = player;
  for (const auto& [m, champion] : window) record(h, *m, champion);
  return h;
}

HistoryIndex build_histories(std::span<const MatchRecord> matches, const HistoryOptions& options) {
  if (options.window) {
    std::unordered_map<PlayerId, std::deque<std::pair<const MatchRecord*, ChampionId>>> windows;
    for (const auto& m : matches)
      for (const auto& team : m.teams)
        for (const auto& slot : team.slots) {
          auto& w = windows[slot.player];
          w.emplace_back(&m, slot.champion);
          if (w.size() > *options.window) w.pop_front();
        }
    HistoryIndex out;
    for (auto& [player, w] : windows) {
      PlayerHistory h;
      h.player_id = player;
      for (const auto& [m, champion] : w) record(h, *m, champion);
      out.emplace(player, std::move(h));
    }
    return out;
  }
  HistoryIndex out;
  for (const auto& m : matches)
    for (const auto& team : m.teams)
      for (const auto& slot : team.slots) {
        auto [it, inserted] = out.try_emplace(slot.player);
        if (inserted) it->second.player_id = slot.player;
        record(it->second, m, slot.champion);
      }
  return out;
}

const ChampionId& most_picked(const PlayerHistory& history) {
  if (!history.usable()) throw data_error("player " + history.player_id + " has no usable history");
  // std::map iterates in key order, so the first strict maximum is the
  // lexicographically smallest among ties.
  auto best = history.picks.begin();
  for (auto it = history.picks.begin(); it != history.picks.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

double generality(const PlayerHistory& history) {
  if (!history.usable()) throw data_error("player " + history.player_id + " has no usable history");
  const double total = history.total;
  double h = 0.0;
  for (const auto& [_, count] : history.picks) {
    const double p = count / total;
    h -= p * std::log(p);
  }
  return h;
}

const PlayerHistory& require_history(const HistoryIndex& histories, const PlayerId& player) {
  auto it = histories.find(player);
  if (it == histories.end()) throw data_error("no history for player " + player);
  if (!it->second.usable()) throw data_error("player " + player + " has no usable history");
  return it->second;
}

}  // namespace teamdesign
