#include "teamdesign/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>

#include "teamdesign/draft.hpp"
#include "teamdesign/rng.hpp"

namespace teamdesign {

namespace {

// Independent streams hanging off the config seed.
enum Stream : std::uint64_t { kCatalog = 1, kPlayers = 2, kDraft = 3, kOutcome = 4, kBayes = 5 };

double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

void check_tier_array(const TierArray& a, const char* name, double lo, double hi) {
  for (double v : a)
    if (!(v >= lo && v <= hi)) throw invalid_argument(fmt::format("{} entries must lie in [{}, {}]", name, lo, hi));
}

std::size_t sample_index(CounterRng& rng, std::span<const double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding left us past the end; take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0) return i;
  return 0;
}

std::vector<double> dirichlet(CounterRng& rng, double alpha, std::size_t k) {
  std::vector<double> lg(k);
  for (auto& v : lg) v = rng.log_gamma_variate(alpha);
  const double top = *std::max_element(lg.begin(), lg.end());
  double sum = 0;
  for (auto& v : lg) sum += (v = std::exp(v - top));
  for (auto& v : lg) v /= sum;
  return lg;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (n_clusters < 1) throw invalid_argument("n_clusters must be positive");
  if (n_champions < n_clusters) throw invalid_argument("n_champions must be at least n_clusters");
  if (feature_dim < std::max(2, n_clusters)) throw invalid_argument("feature_dim must be at least max(2, n_clusters)");
  if (!(cluster_separation >= 0.0) || !std::isfinite(cluster_separation))
    throw invalid_argument("cluster_separation must be finite and non-negative");
  if (n_players < 10) throw invalid_argument("n_players must be at least 10");
  check_tier_array(tier_mix, "tier_mix", 0.0, 1.0);
  if (std::abs(std::accumulate(tier_mix.begin(), tier_mix.end(), 0.0) - 1.0) > 1e-9)
    throw invalid_argument("tier_mix must sum to 1");
  for (double a : preference_concentration)
    if (!(a > 0.0) || !std::isfinite(a)) throw invalid_argument("preference_concentration entries must be > 0");
  if (champions_per_player < 1 || champions_per_player > n_champions)
    throw invalid_argument("champions_per_player must be in [1, n_champions]");
  if (!(role_focus >= 0.0 && role_focus <= 1.0)) throw invalid_argument("role_focus must lie in [0, 1]");
  if (!cluster_popularity.empty()) {
    if (static_cast<int>(cluster_popularity.size()) != n_clusters)
      throw invalid_argument("cluster_popularity needs one weight per cluster");
    for (double w : cluster_popularity)
      if (!(w >= 0.0)) throw invalid_argument("cluster_popularity weights must be non-negative");
    if (std::accumulate(cluster_popularity.begin(), cluster_popularity.end(), 0.0) <= 0.0)
      throw invalid_argument("cluster_popularity must have positive mass");
  }
  if (picks_per_player < 1) throw invalid_argument("picks_per_player must be positive");
  check_tier_array(focus_mean, "focus_mean", 0.0, 1.0);
  check_tier_array(coordination, "coordination", 0.0, 1.0);
  if (!(focus_spread >= 0.0 && focus_spread <= 1.0)) throw invalid_argument("focus_spread must lie in [0, 1]");
  if (bans_per_team < 0) throw invalid_argument("bans_per_team must be non-negative");
  if (n_champions < 2 * (bans_per_team + kTeamSize)) throw invalid_argument("too few champions for bans and picks");
  if (n_matches < 0) throw invalid_argument("n_matches must be non-negative");
  for (const auto& [name, beta] : planted_beta) {
    if (!feature_column(name)) throw invalid_argument("planted_beta names an unknown feature: " + name);
    if (name == "starting_bottom") throw invalid_argument("the side effect is set through bottom_side_rate");
    if (!std::isfinite(beta)) throw invalid_argument("planted_beta must be finite");
  }
  if (!(bottom_side_rate > 0.0 && bottom_side_rate < 1.0)) throw invalid_argument("bottom_side_rate must lie in (0, 1)");
  if (bayes_samples < 1) throw invalid_argument("bayes_samples must be positive");
  if (space_components < 1) throw invalid_argument("space_components must be positive");
}

SyntheticCatalog gen_catalog(const GeneratorConfig& config) {
  config.validate();
  CounterRng rng(config.seed, kCatalog);
  const int n = config.n_champions, d = config.feature_dim, k = config.n_clusters;

  Eigen::MatrixXd dirs(d, k);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < k; ++j) dirs(i, j) = rng.normal();
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(dirs).householderQ() * Eigen::MatrixXd::Identity(d, k);

  SyntheticCatalog out;
  out.planted_labels.resize(n);
  for (int i = 0; i < n; ++i) out.planted_labels[i] = i % k + 1;
  rng.shuffle(std::span<int>(out.planted_labels));

  auto& c = out.catalog;
  c.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    c.ids.push_back(fmt::format("CH{:03d}", i));
    const int label = out.planted_labels[i] - 1;
    for (int j = 0; j < d; ++j) c.features(i, j) = rng.normal() + q(j, label) * config.cluster_separation / std::sqrt(2.0);
  }
  for (int j = 0; j < d; ++j) c.feature_names.push_back(fmt::format("attr{:03d}", j));
  return out;
}

std::vector<SyntheticPlayer> gen_players(const GeneratorConfig& config, const SimilaritySpace& space) {
  config.validate();
  const auto n_champ = static_cast<int>(space.ids.size());
  if (config.champions_per_player > n_champ) throw invalid_argument("champions_per_player exceeds the catalog");
  const int k = space.clusters();
  std::vector<std::vector<int>> members(k);
  for (int i = 0; i < n_champ; ++i) members[space.cluster[i] - 1].push_back(i);
  std::vector<double> popularity = config.cluster_popularity;
  if (static_cast<int>(popularity.size()) != k) popularity.assign(k, 1.0);

  // Deterministic tier quotas from the mix, remainder to the largest shares.
  std::array<int, kTierCount> quota{};
  int assigned = 0;
  for (int t = 0; t < kTierCount; ++t) assigned += quota[t] = static_cast<int>(std::floor(config.tier_mix[t] * config.n_players));
  std::array<int, kTierCount> order;
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return config.tier_mix[a] * config.n_players - quota[a] > config.tier_mix[b] * config.n_players - quota[b];
  });
  for (int i = 0; assigned < config.n_players; ++i, ++assigned) ++quota[order[i % kTierCount]];

  CounterRng base(config.seed, kPlayers);
  std::vector<SyntheticPlayer> players;
  players.reserve(config.n_players);
  int index = 0;
  for (int t = 0; t < kTierCount; ++t) {
    for (int n = 0; n < quota[t]; ++n, ++index) {
      CounterRng rng = base.derive(static_cast<std::uint64_t>(index));
      SyntheticPlayer p;
      p.home_cluster = static_cast<int>(sample_index(rng, popularity)) + 1;

      // Pool: a role_focus share from the home cluster, the rest anywhere.
      const int want = config.champions_per_player;
      const auto& home = members[p.home_cluster - 1];
      const int from_home = std::min<int>(static_cast<int>(std::ceil(config.role_focus * want)), static_cast<int>(home.size()));
      std::vector<int> h = home;
      std::set<int> chosen;
      std::vector<int> pool;
      for (int i = 0; i < from_home; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(h.size() - i));
        std::swap(h[i], h[j]);
        pool.push_back(h[i]);
        chosen.insert(h[i]);
      }
      while (static_cast<int>(pool.size()) < want) {
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_champ)));
        if (chosen.insert(c).second) pool.push_back(c);
      }
      // Heaviest weight goes to the first home champion so the favourite
      // sits in the home role.
      std::vector<double> w = dirichlet(rng, config.preference_concentration[t], pool.size());
      std::sort(w.begin(), w.end(), std::greater<>());
      for (int c : pool) p.pool.push_back(space.ids[c]);
      p.weights = w;

      auto& hist = p.history;
      hist.player_id = fmt::format("SYN-{:05d}", index);
      hist.region = Region::SYN;
      hist.tier = kAllTiers[t];
      hist.division = (hist.tier == Tier::Master || hist.tier == Tier::Challenger) ? 1 : 1 + static_cast<int>(rng.below(5));
      for (int i = 0; i < config.picks_per_player; ++i) ++hist.picks[p.pool[sample_index(rng, p.weights)]];
      hist.total = config.picks_per_player;
      players.push_back(std::move(p));
    }
  }
  return players;
}

namespace {

struct TeamDraft {
  std::array<int, kTeamSize> players;  // indices into the player list
  std::array<ChampionId, kTeamSize> picks;
  std::array<int, kTeamSize> pick_index{};
  double focus = 0;
  bool coordinated = false;
};

class MatchBuilder {
 public:
  MatchBuilder(const GeneratorConfig& config, const SimilaritySpace& space, const std::vector<SyntheticPlayer>& players)
      : config_(config), space_(space), players_(players) {
    for (int t = 0; t < kTierCount; ++t) by_tier_[t].clear();
    for (std::size_t i = 0; i < players.size(); ++i)
      by_tier_[static_cast<int>(players[i].history.tier)].push_back(static_cast<int>(i));
    for (int t = 0; t < kTierCount; ++t) {
      tier_weight_[t] = by_tier_[t].size() >= 2 * kTeamSize ? config.tier_mix[t] : 0.0;
      if (config.tier_mix[t] > 0 && by_tier_[t].size() < 2 * kTeamSize)
        throw invalid_argument(fmt::format("tier {} has {} players; at least 10 are needed", to_string(kAllTiers[t]),
                                           by_tier_[t].size()));
    }
    mains_.reserve(players.size());
    for (const auto& p : players) mains_.push_back(space.index_of(most_picked(p.history)));
  }

  MatchRecord build(std::size_t index) const {
    CounterRng rng = CounterRng(config_.seed, kDraft).derive(index);
    MatchRecord m;
    m.match_id = fmt::format("SYN-M{:07d}", index);
    m.region = Region::SYN;
    const int t = static_cast<int>(sample_index(rng, tier_weight_));
    m.tier = kAllTiers[t];
    m.division = (m.tier == Tier::Master || m.tier == Tier::Challenger) ? 1 : 1 + static_cast<int>(rng.below(5));

    // Ten distinct players from the tier.
    std::vector<int> roster = by_tier_[t];
    for (int i = 0; i < 2 * kTeamSize; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(roster.size() - i));
      std::swap(roster[i], roster[j]);
    }
    std::vector<bool> available(space_.ids.size(), true);
    const auto n_champ = static_cast<std::uint64_t>(space_.ids.size());
    for (int b = 0; b < 2 * config_.bans_per_team;) {
      const auto c = rng.below(n_champ);
      if (available[c]) available[c] = false, ++b;
    }

    std::array<TeamDraft, 2> teams;
    std::array<std::array<int, kTeamSize>, 2> order;
    std::array<std::vector<int>, 2> picked;
    for (int side = 0; side < 2; ++side) {
      auto& team = teams[side];
      for (int s = 0; s < kTeamSize; ++s) team.players[s] = roster[side * kTeamSize + s];
      std::iota(order[side].begin(), order[side].end(), 0);
      rng.shuffle(std::span<int>(order[side]));
      const double lo = std::max(0.0, config_.focus_mean[t] - config_.focus_spread);
      const double hi = std::min(1.0, config_.focus_mean[t] + config_.focus_spread);
      team.focus = lo + (hi - lo) * rng.uniform();
      team.coordinated = rng.uniform() < config_.coordination[t];
    }

    const DraftConfig snake;
    for (const auto& [side, pos] : snake.pick_sequence) {
      auto& team = teams[side];
      const int slot = order[side][pos - 1];
      const bool focused = rng.uniform() < team.focus;
      const bool no_main = pos == kTeamSize && config_.fifth_pick_off_main[t];
      const int c = choose(rng, team.players[slot], focused, team.coordinated, no_main, available, picked[side]);
      available[c] = false;
      picked[side].push_back(c);
      team.picks[slot] = space_.ids[c];
      team.pick_index[slot] = pos;
    }

    for (int side = 0; side < 2; ++side) {
      auto& rec = m.teams[side];
      rec.side = side == 0 ? Side::Bottom : Side::Top;
      for (int s = 0; s < kTeamSize; ++s)
        rec.slots[s] = {players_[teams[side].players[s]].history.player_id, teams[side].picks[s],
                        teams[side].pick_index[s]};
    }
    return m;
  }

 private:
  int choose(CounterRng& rng, int player, bool focused, bool coordinated, bool no_main,
             const std::vector<bool>& available, const std::vector<int>& teammates) const {
    const int main = mains_[player];
    const auto n = static_cast<int>(space_.ids.size());
    const auto usable = [&](int c) { return available[c] && !(no_main && c == main); };

    if (!focused) {
      for (;;) {
        const int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        if (usable(c)) return c;
      }
    }
    const auto& p = players_[player];
    if (coordinated) {
      std::vector<bool> covered(space_.clusters() + 1, false);
      for (int c : teammates) covered[space_.cluster[c]] = true;
      const bool any_open = std::find(covered.begin() + 1, covered.end(), false) != covered.end();
      if (any_open) {
        if (usable(main) && !covered[space_.cluster[main]]) return main;
        // Closest open-role champion from the player's pool, else from anywhere.
        int best = -1;
        for (const auto& id : p.pool) {
          const int c = space_.index_of(id);
          if (usable(c) && !covered[space_.cluster[c]] && (best < 0 || space_.dist(main, c) < space_.dist(main, best)))
            best = c;
        }
        if (best >= 0) return best;
        for (int c = 0; c < n; ++c)
          if (usable(c) && !covered[space_.cluster[c]] && (best < 0 || space_.dist(main, c) < space_.dist(main, best)))
            best = c;
        if (best >= 0) return best;
      }
    }
    if (usable(main)) return main;
    // Preference-ordered fallback, then the nearest available champion.
    for (const auto& id : p.pool) {
      const int c = space_.index_of(id);
      if (usable(c)) return c;
    }
    int best = -1;
    for (int c = 0; c < n; ++c)
      if (usable(c) && (best < 0 || space_.dist(main, c) < space_.dist(main, best))) best = c;
    return best;
  }

  const GeneratorConfig& config_;
  const SimilaritySpace& space_;
  const std::vector<SyntheticPlayer>& players_;
  std::array<std::vector<int>, kTierCount> by_tier_;
  std::array<double, kTierCount> tier_weight_{};
  std::vector<int> mains_;
};

}  // namespace

double calibrate_offset(std::span<const double> scores, double rate) {
  if (scores.empty()) throw invalid_argument("no scores to calibrate");
  if (!(rate > 0.0 && rate < 1.0)) throw invalid_argument("rate must lie in (0, 1)");
  const auto mean_p = [&](double g) {
    double s = 0;
    for (double x : scores) s += sigmoid(x + g);
    return s / static_cast<double>(scores.size());
  };
  double lo = -50, hi = 50;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mean_p(mid) < rate ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

GeneratedMatches gen_matches(const GeneratorConfig& config, const SimilaritySpace& space,
                             const std::vector<SyntheticPlayer>& players) {
  config.validate();
  const MatchBuilder builder(config, space, players);
  GeneratedMatches out;
  const auto n = static_cast<std::size_t>(config.n_matches);
  out.matches.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.matches.push_back(builder.build(i));

  std::unordered_map<PlayerId, const PlayerHistory*> history_of;
  for (const auto& p : players) history_of[p.history.player_id] = &p.history;

  // Features for both teams (bottom first), then two-pass standardization.
  constexpr std::size_t F = kFeatureNames.size();
  std::vector<std::array<double, F>> feats(2 * n);
  for (std::size_t i = 0; i < n; ++i)
    for (int side = 0; side < 2; ++side) {
      const auto& team = out.matches[i].teams[side];
      std::array<ChampionId, kTeamSize> champs;
      std::array<PlayerHistory, kTeamSize> hist;
      for (int s = 0; s < kTeamSize; ++s) {
        champs[s] = team.slots[s].champion;
        hist[s] = *history_of.at(team.slots[s].player);
      }
      feats[2 * i + side] = team_features(space, champs, hist, team.side).values();
    }

  auto& truth = out.truth;
  truth.planted_beta = config.planted_beta;
  truth.bottom_side_rate = config.bottom_side_rate;
  truth.planted_labels.clear();
  if (!feats.empty()) {
    for (std::size_t j = 0; j < F; ++j) {
      double mean = 0;
      for (const auto& f : feats) mean += f[j];
      mean /= static_cast<double>(feats.size());
      double var = 0;
      for (const auto& f : feats) var += (f[j] - mean) * (f[j] - mean);
      var /= static_cast<double>(feats.size());
      truth.feature_mean[j] = mean;
      truth.feature_std[j] = std::sqrt(var);
    }
  }
  std::array<double, F> beta{};
  for (const auto& [name, b] : config.planted_beta) beta[*feature_column(name)] = b;

  // Side-free linear score of each team.
  std::vector<double> u(2 * n, 0.0);
  for (std::size_t r = 0; r < u.size(); ++r)
    for (std::size_t j = 0; j < F; ++j)
      if (beta[j] != 0.0 && truth.feature_std[j] > 0.0)
        u[r] += beta[j] * (feats[r][j] - truth.feature_mean[j]) / truth.feature_std[j];

  std::vector<double> diff(n);
  for (std::size_t i = 0; i < n; ++i) diff[i] = u[2 * i] - u[2 * i + 1];
  truth.side_offset = n ? calibrate_offset(diff, config.bottom_side_rate) : 0.0;
  const double g = truth.side_offset;

  // Team-level rate: average over opponents from the same tier.
  std::array<std::vector<std::size_t>, kTierCount> rows_by_tier;
  for (std::size_t i = 0; i < n; ++i) {
    rows_by_tier[static_cast<int>(out.matches[i].tier)].push_back(2 * i);
    rows_by_tier[static_cast<int>(out.matches[i].tier)].push_back(2 * i + 1);
  }
  const CounterRng bayes_base(config.seed, kBayes);
  CounterRng outcome_base(config.seed, kOutcome);
  double match_acc = 0, team_acc = 0;
  truth.matches.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& mt = truth.matches[i];
    auto& m = out.matches[i];
    mt.match_id = m.match_id;
    mt.p_bottom = sigmoid(diff[i] + g);
    CounterRng orng = outcome_base.derive(i);
    const bool bottom_wins = orng.uniform() < mt.p_bottom;
    m.teams[0].outcome = bottom_wins ? Outcome::Win : Outcome::Loss;
    m.teams[1].outcome = bottom_wins ? Outcome::Loss : Outcome::Win;

    const auto& pool = rows_by_tier[static_cast<int>(m.tier)];
    CounterRng brng = bayes_base.derive(i);
    double qb = 0, qt = 0;
    for (int k = 0; k < config.bayes_samples; ++k) {
      const double opp = u[pool[brng.below(pool.size())]];
      qb += sigmoid(u[2 * i] - opp + g);
      qt += sigmoid(u[2 * i + 1] - opp - g);
    }
    mt.q_bottom = qb / config.bayes_samples;
    mt.q_top = qt / config.bayes_samples;
    match_acc += std::max(mt.p_bottom, 1 - mt.p_bottom);
    team_acc += std::max(mt.q_bottom, 1 - mt.q_bottom) + std::max(mt.q_top, 1 - mt.q_top);
  }
  if (n) {
    truth.match_bayes_accuracy = match_acc / static_cast<double>(n);
    truth.team_bayes_accuracy = team_acc / static_cast<double>(2 * n);
  }
  return out;
}

HistoryIndex SyntheticCorpus::histories() const {
  HistoryIndex idx;
  for (const auto& p : players) idx.emplace(p.history.player_id, p.history);
  return idx;
}

SyntheticCorpus generate(const GeneratorConfig& config) {
  config.validate();
  SyntheticCorpus c;
  c.config = config;
  c.catalog = gen_catalog(config);
  SpaceParams params;
  params.components = std::min(config.space_components, std::min(config.feature_dim, config.n_champions - 1));
  params.clusters = config.n_clusters;
  params.seed = config.seed;
  c.space = build_space(c.catalog.catalog, params);
  c.players = gen_players(config, c.space);
  auto gm = gen_matches(config, c.space, c.players);
  c.matches = std::move(gm.matches);
  c.truth = std::move(gm.truth);
  c.truth.planted_labels = c.catalog.planted_labels;
  return c;
}

}  // namespace teamdesign
