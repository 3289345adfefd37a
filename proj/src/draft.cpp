#include "teamdesign/draft.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

#include "teamdesign/rng.hpp"

namespace teamdesign {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Ban: return "Ban";
    case Phase::Pick: return "Pick";
    case Phase::Trade: return "Trade";
    case Phase::Complete: return "Complete";
  }
  return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
  for (Phase p : {Phase::Ban, Phase::Pick, Phase::Trade, Phase::Complete})
    if (to_string(p) == s) return p;
  return std::nullopt;
}

std::string_view to_string(DraftAction::Kind k) {
  switch (k) {
    case DraftAction::Kind::Ban: return "ban";
    case DraftAction::Kind::Pick: return "pick";
    case DraftAction::Kind::Swap: return "swap";
    case DraftAction::Kind::Finalize: return "finalize";
  }
  return "?";
}

std::optional<DraftAction::Kind> parse_action_kind(std::string_view s) {
  using K = DraftAction::Kind;
  for (K k : {K::Ban, K::Pick, K::Swap, K::Finalize})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::string describe(const DraftAction& a) {
  switch (a.kind) {
    case DraftAction::Kind::Ban:
    case DraftAction::Kind::Pick:
      return fmt::format("{} {} {}", team_letter(a.team), to_string(a.kind), a.champion);
    case DraftAction::Kind::Swap:
      return fmt::format("{} swap slots {} and {}", team_letter(a.team), a.slot_a + 1, a.slot_b + 1);
    case DraftAction::Kind::Finalize:
      return "finalize";
  }
  return "?";
}

DraftConfig DraftConfig::alternating() {
  DraftConfig c;
  c.pick_sequence.clear();
  for (int pos = 1; pos <= kTeamSize; ++pos) {
    c.pick_sequence.emplace_back(0, pos);
    c.pick_sequence.emplace_back(1, pos);
  }
  return c;
}

void DraftConfig::validate() const {
  for (int t : ban_sequence)
    if (t != 0 && t != 1) throw invalid_argument("ban sequence names an unknown team");
  std::array<std::array<int, kTeamSize>, 2> seen{};
  for (const auto& [team, pos] : pick_sequence) {
    if ((team != 0 && team != 1) || pos < 1 || pos > kTeamSize)
      throw invalid_argument("pick sequence entry out of range");
    ++seen[team][pos - 1];
  }
  for (const auto& team : seen)
    for (int n : team)
      if (n != 1) throw invalid_argument("pick sequence must give each team positions 1..5 exactly once");
}

std::optional<int> DraftState::acting_team() const {
  if (phase == Phase::Ban) return config.ban_sequence[ban_cursor];
  if (phase == Phase::Pick) return config.pick_sequence[turn_cursor].first;
  return std::nullopt;
}

std::optional<int> DraftState::acting_slot() const {
  if (phase == Phase::Ban) return pick_order[config.ban_sequence[ban_cursor]][0];
  if (phase == Phase::Pick) {
    const auto& [team, pos] = config.pick_sequence[turn_cursor];
    return pick_order[team][pos - 1];
  }
  return std::nullopt;
}

int DraftState::pick_position(int team, int slot) const {
  for (int p = 0; p < kTeamSize; ++p)
    if (pick_order[team][p] == slot) return p + 1;
  return 0;
}

int DraftState::picks_made(int team) const {
  return static_cast<int>(std::count_if(picks[team].begin(), picks[team].end(), [](const auto& p) { return p.has_value(); }));
}

namespace {

void advance_phase(DraftState& s) {
  if (s.phase == Phase::Ban && s.ban_cursor >= s.config.ban_sequence.size()) s.phase = Phase::Pick;
  if (s.phase == Phase::Pick && s.turn_cursor >= s.config.pick_sequence.size()) s.phase = Phase::Trade;
}

std::size_t total_budget(const DraftConfig& c) { return c.ban_sequence.size() + c.pick_sequence.size(); }

}  // namespace

DraftState new_draft(std::span<const ChampionId> pool, const std::array<TeamRoster, 2>& rosters,
                     std::array<Side, 2> sides, std::uint64_t seed, const DraftConfig& config) {
  config.validate();
  std::set<PlayerId> players;
  for (const auto& team : rosters)
    for (const auto& h : team) {
      if (h.player_id.empty()) throw invalid_argument("roster entry without player id");
      if (!players.insert(h.player_id).second) throw invalid_argument("duplicate player: " + h.player_id);
      if (!h.usable()) throw data_error("player " + h.player_id + " has no usable history");
    }
  if (sides[0] == sides[1]) throw invalid_argument("teams must start on opposite sides");

  DraftState s;
  s.config = config;
  s.seed = seed;
  s.pool = std::set<ChampionId>(pool.begin(), pool.end());
  if (s.pool.size() != pool.size()) throw invalid_argument("champion pool contains duplicates");
  if (s.pool.size() < total_budget(config))
    throw invalid_argument(fmt::format("champion pool too small: {} champions for {} bans and picks", s.pool.size(),
                                       total_budget(config)));
  s.champions_in_play.assign(s.pool.begin(), s.pool.end());
  s.rosters = rosters;
  s.sides = sides;
  for (int t = 0; t < 2; ++t) {
    std::iota(s.pick_order[t].begin(), s.pick_order[t].end(), 0);
    CounterRng rng(seed, 0x7069636bULL + static_cast<std::uint64_t>(t));
    rng.shuffle(std::span<int>(s.pick_order[t]));
  }
  advance_phase(s);
  return s;
}

std::vector<DraftAction> legal_actions(const DraftState& state) {
  std::vector<DraftAction> out;
  switch (state.phase) {
    case Phase::Ban: {
      const int team = *state.acting_team();
      for (const auto& c : state.pool) out.push_back(DraftAction::ban(team, c));
      break;
    }
    case Phase::Pick: {
      const int team = *state.acting_team();
      for (const auto& c : state.pool) out.push_back(DraftAction::pick(team, c));
      break;
    }
    case Phase::Trade:
      for (int t = 0; t < 2; ++t)
        for (int a = 0; a < kTeamSize; ++a)
          for (int b = a + 1; b < kTeamSize; ++b) out.push_back(DraftAction::swap(t, a, b));
      out.push_back(DraftAction::finalize());
      break;
    case Phase::Complete:
      break;
  }
  return out;
}

DraftState apply_action(const DraftState& state, const DraftAction& action) {
  using K = DraftAction::Kind;
  if (state.phase == Phase::Complete) throw IllegalAction("draft is complete");
  if (action.kind != K::Finalize && action.team != 0 && action.team != 1) throw IllegalAction("unknown team");

  DraftState next = state;
  switch (action.kind) {
    case K::Ban:
    case K::Pick: {
      const Phase needed = action.kind == K::Ban ? Phase::Ban : Phase::Pick;
      if (state.phase != needed)
        throw IllegalAction(fmt::format("cannot {} during the {} phase", to_string(action.kind), to_string(state.phase)));
      if (action.team != *state.acting_team())
        throw IllegalAction(fmt::format("it is team {}'s turn", team_letter(*state.acting_team())));
      if (!state.pool.count(action.champion)) {
        bool known = std::binary_search(state.champions_in_play.begin(), state.champions_in_play.end(), action.champion);
        throw IllegalAction(known ? "champion " + action.champion + " is already banned or picked"
                                  : "champion " + action.champion + " is not in this draft");
      }
      next.pool.erase(action.champion);
      if (action.kind == K::Ban) {
        next.bans[action.team].push_back(action.champion);
        ++next.ban_cursor;
      } else {
        next.picks[action.team][*state.acting_slot()] = action.champion;
        ++next.turn_cursor;
      }
      advance_phase(next);
      break;
    }
    case K::Swap: {
      if (state.phase != Phase::Trade) throw IllegalAction("trades are only allowed after all picks");
      if (action.slot_a < 0 || action.slot_b >= kTeamSize || action.slot_a >= action.slot_b)
        throw IllegalAction("swap needs two distinct slots");
      std::swap(next.picks[action.team][action.slot_a], next.picks[action.team][action.slot_b]);
      break;
    }
    case K::Finalize:
      if (state.phase != Phase::Trade) throw IllegalAction("can only finalize during the Trade phase");
      next.phase = Phase::Complete;
      break;
  }
  return next;
}

void check_invariants(const DraftState& s) {
  const auto fail = [](const std::string& why) { throw data_error("draft invariant violated: " + why); };
  std::size_t bans = s.bans[0].size() + s.bans[1].size();
  if (bans > s.config.ban_sequence.size()) fail("too many bans");
  if (bans != s.ban_cursor) fail("ban cursor out of sync");
  std::multiset<ChampionId> used(s.pool.begin(), s.pool.end());
  for (const auto& team : s.bans) used.insert(team.begin(), team.end());
  int picked = 0;
  for (int t = 0; t < 2; ++t) {
    if (s.picks_made(t) > kTeamSize) fail("too many picks");
    for (const auto& p : s.picks[t])
      if (p) used.insert(*p), ++picked;
  }
  if (static_cast<std::size_t>(picked) != s.turn_cursor) fail("turn cursor out of sync");
  std::vector<ChampionId> all(used.begin(), used.end());
  if (all != s.champions_in_play) fail("pool, bans and picks do not partition the champions in play");
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) fail("champion appears twice");
  const bool bans_done = s.ban_cursor == s.config.ban_sequence.size();
  const bool picks_done = s.turn_cursor == s.config.pick_sequence.size();
  switch (s.phase) {
    case Phase::Ban:
      if (bans_done || picked) fail("ban phase state");
      break;
    case Phase::Pick:
      if (!bans_done || picks_done) fail("pick phase state");
      break;
    case Phase::Trade:
    case Phase::Complete:
      if (!bans_done || !picks_done) fail("post-pick phase reached early");
      break;
  }
  // Picks land on the slots named by the pick order.
  for (std::size_t i = 0; i < s.turn_cursor; ++i) {
    const auto& [team, pos] = s.config.pick_sequence[i];
    if (s.phase == Phase::Pick && !s.picks[team][s.pick_order[team][pos - 1]]) fail("pick missing for a past turn");
  }
}

std::string actor_of(const DraftState& s, const DraftAction& a) {
  switch (a.kind) {
    case DraftAction::Kind::Ban:
    case DraftAction::Kind::Pick:
      if (auto slot = s.acting_slot(); slot && s.acting_team() == a.team) return s.rosters[a.team][*slot].player_id;
      return std::string("team ") + team_letter(a.team);
    case DraftAction::Kind::Swap:
      return std::string("team ") + team_letter(a.team);
    case DraftAction::Kind::Finalize:
      return "system";
  }
  return "?";
}

DraftState replay(DraftState initial, std::span<const DraftAction> actions) {
  for (const auto& a : actions) initial = apply_action(initial, a);
  return initial;
}

// --- recommendations -------------------------------------------------------

std::array<ChampionId, kTeamSize> MostPickedImputation::complete(const DraftState& state, const SimilaritySpace& space,
                                                                 int team, int slot,
                                                                 const ChampionId& candidate) const {
  std::set<ChampionId> available = state.pool;
  available.erase(candidate);
  std::array<ChampionId, kTeamSize> out;
  for (int s = 0; s < kTeamSize; ++s) {
    if (s == slot) {
      out[s] = candidate;
    } else if (state.picks[team][s]) {
      out[s] = *state.picks[team][s];
    }
  }
  for (int s = 0; s < kTeamSize; ++s) {
    if (!out[s].empty()) continue;
    if (available.empty()) throw data_error("no champions left to impute");
    const ChampionId& main = most_picked(state.rosters[team][s]);
    ChampionId choice;
    if (available.count(main) != 0) {
      choice = main;
    } else {
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& c : available) {
        const double sim = champ_similarity(space, main, c);
        if (sim > best) best = sim, choice = c;
      }
    }
    available.erase(choice);
    out[s] = choice;
  }
  return out;
}

Recommendation recommend(const DraftState& state, const WinModel& model, const SimilaritySpace& space,
                         std::size_t top_n, const ImputationStrategy* strategy, const FeatureOptions& options) {
  if (state.phase != Phase::Pick) throw IllegalAction("recommendations are only available during the Pick phase");
  if (model.weights.size() == 0 || model.feature_order.empty()) throw invalid_argument("no trained model");
  if (state.pool.empty()) throw IllegalAction("no legal picks");
  static const MostPickedImputation default_strategy;
  if (!strategy) strategy = &default_strategy;

  Recommendation rec;
  rec.team = *state.acting_team();
  rec.slot = *state.acting_slot();
  const TeamRoster& roster = state.rosters[rec.team];
  const PlayerHistory& actor = roster[rec.slot];

  for (const auto& c : state.pool) {
    const auto team = strategy->complete(state, space, rec.team, rec.slot, c);
    const TeamFeatureVector f = team_features(space, team, roster, state.sides[rec.team], options);
    Candidate cand;
    cand.champion = c;
    cand.win_probability = predict(model, f);
    cand.proficiency_component = proficiency(space, actor, c, options);
    cand.congruency_after = static_cast<int>(f.congruency);
    cand.diversity_after = f.diversity;
    rec.candidates.push_back(std::move(cand));
  }
  std::sort(rec.candidates.begin(), rec.candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.win_probability != b.win_probability) return a.win_probability > b.win_probability;
    if (a.proficiency_component != b.proficiency_component) return a.proficiency_component > b.proficiency_component;
    return a.champion < b.champion;
  });
  if (rec.candidates.size() > top_n) rec.candidates.resize(top_n);
  for (auto& cand : rec.candidates)
    cand.explanation = fmt::format("proficiency {:.2f}, team covers {}/{} clusters, diversity {:.2f}",
                                   cand.proficiency_component, cand.congruency_after, space.clusters(),
                                   cand.diversity_after);
  return rec;
}

namespace {

int swaps_needed(const std::array<int, kTeamSize>& perm) {
  std::array<bool, kTeamSize> seen{};
  int cycles = 0;
  for (int i = 0; i < kTeamSize; ++i) {
    if (seen[i]) continue;
    ++cycles;
    for (int j = i; !seen[j]; j = perm[j]) seen[j] = true;
  }
  return kTeamSize - cycles;
}

}  // namespace

TradePlan optimize_trades(const DraftState& state, const SimilaritySpace& space, int team,
                          const FeatureOptions& options) {
  if (team != 0 && team != 1) throw invalid_argument("unknown team");
  if (state.picks_made(team) != kTeamSize) throw IllegalAction("trade optimization needs all five picks");
  std::array<ChampionId, kTeamSize> current;
  for (int s = 0; s < kTeamSize; ++s) current[s] = *state.picks[team][s];

  // gain[s][k]: proficiency of the player in slot s on the champion now in slot k.
  std::array<std::array<double, kTeamSize>, kTeamSize> prof{};
  for (int s = 0; s < kTeamSize; ++s)
    for (int k = 0; k < kTeamSize; ++k) prof[s][k] = proficiency(space, state.rosters[team][s], current[k], options);

  const auto total = [&](const std::array<int, kTeamSize>& perm) {
    double sum = 0.0;
    for (int s = 0; s < kTeamSize; ++s) sum += prof[s][perm[s]];
    return sum;
  };
  const auto assignment = [&](const std::array<int, kTeamSize>& perm) {
    std::array<ChampionId, kTeamSize> a;
    for (int s = 0; s < kTeamSize; ++s) a[s] = current[perm[s]];
    return a;
  };

  constexpr double kTie = 1e-12;
  std::array<int, kTeamSize> perm{0, 1, 2, 3, 4};
  std::array<int, kTeamSize> best = perm;
  double best_value = total(perm);
  const double current_value = best_value;
  while (std::next_permutation(perm.begin(), perm.end())) {
    const double v = total(perm);
    bool better = v > best_value + kTie;
    if (!better && std::abs(v - best_value) <= kTie) {
      const int sa = swaps_needed(perm), sb = swaps_needed(best);
      better = sa < sb || (sa == sb && assignment(perm) < assignment(best));
    }
    if (better) {
      best = perm;
      best_value = v;
    }
  }

  TradePlan plan;
  plan.team = team;
  plan.assignment = assignment(best);
  plan.current_mean_proficiency = current_value / kTeamSize;
  plan.optimal_mean_proficiency = best_value / kTeamSize;
  plan.mean_proficiency_gain = plan.optimal_mean_proficiency - plan.current_mean_proficiency;
  std::array<ChampionId, kTeamSize> arrangement = current;
  for (int s = 0; s < kTeamSize; ++s) {
    if (arrangement[s] == plan.assignment[s]) continue;
    for (int j = s + 1; j < kTeamSize; ++j)
      if (arrangement[j] == plan.assignment[s]) {
        std::swap(arrangement[s], arrangement[j]);
        plan.swaps.emplace_back(s, j);
        break;
      }
  }
  return plan;
}

}  // namespace teamdesign
