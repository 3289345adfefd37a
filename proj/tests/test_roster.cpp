#include <cmath>
#include <map>
#include <vector>

#include "doctest.h"
#include "teamdesign/rng.hpp"
#include "teamdesign/roster.hpp"

using namespace teamdesign;

namespace {

// One match with `player` on the bottom team playing `champion`; the other
// nine slots are filler.
MatchRecord match_with(const std::string& id, const PlayerId& player, const ChampionId& champion,
                       Tier tier = Tier::Gold) {
  MatchRecord m;
  m.match_id = id;
  m.tier = tier;
  m.division = 2;
  m.teams[0].side = Side::Bottom;
  m.teams[0].outcome = Outcome::Win;
  m.teams[1].side = Side::Top;
  m.teams[1].outcome = Outcome::Loss;
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < kTeamSize; ++s)
      m.teams[t].slots[s] = {"filler" + std::to_string(t * 5 + s), "X" + std::to_string(t * 5 + s), s + 1};
  m.teams[0].slots[0].player = player;
  m.teams[0].slots[0].champion = champion;
  return m;
}

PlayerHistory history_of(std::map<ChampionId, int> picks) {
  PlayerHistory h;
  h.player_id = "p";
  for (const auto& [c, n] : picks) h.total += n;
  h.picks = std::move(picks);
  return h;
}

}  // namespace

TEST_CASE("build_history counts picks") {
  std::vector<MatchRecord> ms{match_with("m1", "u", "A"), match_with("m2", "u", "A"),
                              match_with("m3", "u", "B", Tier::Platinum), match_with("m4", "v", "C")};
  const PlayerHistory h = build_history(ms, "u");
  CHECK(h.picks == std::map<ChampionId, int>{{"A", 2}, {"B", 1}});
  CHECK(h.total == 3);
  CHECK(h.tier == Tier::Platinum);
  CHECK(h.usable());

  const PlayerHistory empty = build_history(std::span<const MatchRecord>{}, "u");
  CHECK(empty.total == 0);
  CHECK_FALSE(empty.usable());
  CHECK_THROWS_AS(most_picked(empty), Error);
  CHECK_THROWS_AS(generality(empty), Error);
}

TEST_CASE("trailing window keeps the most recent matches") {
  std::vector<MatchRecord> ms{match_with("m1", "u", "A"), match_with("m2", "u", "B"), match_with("m3", "u", "B")};
  const PlayerHistory h = build_history(ms, "u", {2});
  CHECK(h.picks == std::map<ChampionId, int>{{"B", 2}});
  const HistoryIndex all = build_histories(ms, {2});
  CHECK(all.at("u") == h);
}

TEST_CASE("60-match log matches an independent tally") {
  CounterRng rng(4);
  std::vector<MatchRecord> ms;
  std::map<ChampionId, int> tally;
  for (int i = 0; i < 60; ++i) {
    const ChampionId c = "K" + std::to_string(rng.below(12));
    ms.push_back(match_with("m" + std::to_string(i), "seed", c));
    ++tally[c];
  }
  const PlayerHistory h = build_history(ms, "seed");
  CHECK(h.picks == tally);
  CHECK(h.total == 60);
  CHECK(build_histories(ms).at("seed") == h);
}

TEST_CASE("most_picked") {
  CHECK(most_picked(history_of({{"A", 5}, {"B", 2}})) == "A");
  CHECK(most_picked(history_of({{"B", 3}, {"A", 3}})) == "A");

  CounterRng rng(10);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<ChampionId, int> picks;
    for (int i = 0; i < 20; ++i) picks["c" + std::to_string(rng.below(1000))] = 1 + static_cast<int>(rng.below(6));
    // Brute-force scan over the same entries in reverse order.
    ChampionId best;
    int best_n = -1;
    for (auto it = picks.rbegin(); it != picks.rend(); ++it)
      if (it->second > best_n || (it->second == best_n && it->first < best)) {
        best = it->first;
        best_n = it->second;
      }
    CHECK(most_picked(history_of(picks)) == best);
  }
}

TEST_CASE("generality") {
  CHECK(generality(history_of({{"A", 7}})) == 0.0);
  CHECK(generality(history_of({{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}})) == doctest::Approx(std::log(4.0)));
  // -(3/4) ln(3/4) - (1/4) ln(1/4)
  CHECK(generality(history_of({{"A", 3}, {"B", 1}})) == doctest::Approx(0.562335).epsilon(1e-6));
}

TEST_CASE("generality bounds and scale invariance") {
  CounterRng rng(77);
  for (int trial = 0; trial < 300; ++trial) {
    std::map<ChampionId, int> picks, scaled;
    const int k = 1 + static_cast<int>(rng.below(15));
    for (int i = 0; i < k; ++i) picks["c" + std::to_string(i)] = 1 + static_cast<int>(rng.below(9));
    const int factor = 2 + static_cast<int>(rng.below(5));
    for (const auto& [c, n] : picks) scaled[c] = n * factor;
    const double g = generality(history_of(picks));
    CHECK(g >= 0.0);
    CHECK(g <= std::log(static_cast<double>(picks.size())) + 1e-12);
    CHECK(generality(history_of(scaled)) == doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("incremental updates produce new values") {
  const PlayerHistory h = history_of({{"A", 1}});
  const PlayerHistory more = h.with_pick("B");
  CHECK(h.total == 1);
  CHECK(more.total == 2);
  CHECK(more.without_pick("B") == h);
  CHECK(h.without_pick("A").picks.empty());
}

TEST_CASE("require_history") {
  HistoryIndex idx;
  idx["a"] = history_of({{"A", 1}});
  idx["b"] = PlayerHistory{};
  CHECK(require_history(idx, "a").total == 1);
  CHECK_THROWS_AS(require_history(idx, "b"), Error);
  CHECK_THROWS_AS(require_history(idx, "zz"), Error);
}
