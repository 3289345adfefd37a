// Acceptance run: one PASS/FAIL line per criterion. Every check compares the
// library against a recomputation written independently here, with fixed
// tolerances and wall-clock limits. Exit status is nonzero if any line fails.

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include "teamdesign/analytics.hpp"
#include "teamdesign/io.hpp"
#include "teamdesign/rng.hpp"
#include "teamdesign/service.hpp"
#include "teamdesign/synthgen.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include <httplib.h>

using namespace teamdesign;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<Verdict()> run;
};

// --- independent helpers -------------------------------------------------------------

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

Eigen::VectorXd coord(const SimilaritySpace& s, const ChampionId& id) { return s.coords.row(s.index_of(id)); }

ChampionId main_of(const PlayerHistory& h) {
  ChampionId best;
  int n = 0;
  for (const auto& [c, k] : h.picks)
    if (k > n) n = k, best = c;
  return best;
}

ChampionCatalog gaussian_catalog(int n, int d, std::uint64_t seed) {
  CounterRng rng(seed, 77);
  ChampionCatalog c;
  c.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    c.ids.push_back(fmt::format("C{:03d}", i));
    for (int j = 0; j < d; ++j) c.features(i, j) = rng.normal();
  }
  for (int j = 0; j < d; ++j) c.feature_names.push_back(fmt::format("f{}", j));
  return c;
}

FeatureTable table_of(const SyntheticCorpus& c) { return compute_feature_table(c.space, c.matches, c.histories()); }

std::array<TeamRoster, 2> rosters_from(const std::vector<SyntheticPlayer>& players, CounterRng& rng) {
  std::vector<std::size_t> idx(players.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(std::span(idx));
  std::array<TeamRoster, 2> r;
  for (int p = 0; p < 10; ++p) r[p / 5][p % 5] = players[idx[p]].history;
  return r;
}

// --- criteria -------------------------------------------------------------------------

Verdict metric_oracle() {
  const auto space = build_space(gaussian_catalog(126, 40, 1), {10, 5, 1});
  CounterRng rng(2025, 1);
  double worst = 0;
  int congruency_mismatch = 0, teams = 0;
  while (teams < 1000) {
    std::vector<int> perm(space.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    std::array<PlayerHistory, kTeamSize> hs;
    std::array<ChampionId, kTeamSize> champs;
    for (int s = 0; s < kTeamSize; ++s) {
      champs[s] = space.ids[perm[s]];
      hs[s].player_id = fmt::format("p{}", s);
      const int k = 1 + static_cast<int>(rng.below(8));
      for (int j = 0; j < k; ++j) hs[s].picks[space.ids[rng.below(space.size())]] += 1 + static_cast<int>(rng.below(9));
      for (const auto& [c, n] : hs[s].picks) hs[s].total += n;
    }
    const auto f = team_features(space, champs, hs, teams % 2 ? Side::Top : Side::Bottom);

    double prof = 0, gen = 0;
    std::set<int> clusters;
    std::vector<Eigen::VectorXd> picked, mains;
    for (int s = 0; s < kTeamSize; ++s) {
      const auto m = main_of(hs[s]);
      prof += cosine(coord(space, m), coord(space, champs[s])) / kTeamSize;
      for (const auto& [c, n] : hs[s].picks) {
        const double p = static_cast<double>(n) / hs[s].total;
        gen -= p * std::log(p) / kTeamSize;
      }
      clusters.insert(space.cluster[space.index_of(champs[s])]);
      picked.push_back(coord(space, champs[s]));
      mains.push_back(coord(space, m));
    }
    auto stats = [](const std::vector<Eigen::VectorXd>& v) {
      std::array<double, 3> out{0, 9, -9};
      for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
          const double d = 1.0 - cosine(v[a], v[b]);
          out[0] += d / 10;
          out[1] = std::min(out[1], d);
          out[2] = std::max(out[2], d);
        }
      return out;
    };
    const auto dv = stats(picked), bd = stats(mains);
    for (double e : {f.mean_proficiency - prof, f.mean_generality - gen, f.diversity - dv[0], f.min_champ_distance - dv[1],
                     f.max_champ_distance - dv[2], f.background_diversity - bd[0], f.min_background_diversity - bd[1],
                     f.max_background_diversity - bd[2], f.starting_bottom - (teams % 2 ? 0.0 : 1.0)})
      worst = std::max(worst, std::abs(e));
    congruency_mismatch += f.congruency != static_cast<double>(clusters.size());
    ++teams;
  }
  return {worst <= 1e-9 && congruency_mismatch == 0,
          fmt::format("{} teams, max abs error {:.2e} (tol 1e-9), congruency mismatches {}", teams, worst, congruency_mismatch)};
}

Verdict linear_algebra() {
  double ortho = 0, asym = 0, diag = 0, mds = 0;
  bool nonincreasing = true, in_range = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto cat = gaussian_catalog(80, 24, seed);
    const auto s = build_space(cat, {10, 5, seed});
    const Eigen::MatrixXd gram = s.loadings.transpose() * s.loadings;
    ortho = std::max(ortho, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
    for (Eigen::Index i = 1; i < s.explained_variance.size(); ++i)
      nonincreasing &= s.explained_variance[i] <= s.explained_variance[i - 1];
    asym = std::max(asym, (s.dist - s.dist.transpose()).cwiseAbs().maxCoeff());
    diag = std::max(diag, s.dist.diagonal().cwiseAbs().maxCoeff());
    in_range &= s.dist.minCoeff() >= 0.0 && s.dist.maxCoeff() <= 2.0;

    CounterRng rng(seed, 5);
    std::vector<int> perm(cat.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span(perm));
    ChampionCatalog shuffled = cat;
    for (std::size_t i = 0; i < cat.size(); ++i) {
      shuffled.ids[i] = cat.ids[perm[i]];
      shuffled.features.row(i) = cat.features.row(perm[i]);
    }
    const auto t = build_space(shuffled, {10, 5, seed});
    for (std::size_t i = 0; i < s.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double a = (s.mds_xy.row(i) - s.mds_xy.row(j)).norm();
        const double b = (t.mds_xy.row(t.index_of(s.ids[i])) - t.mds_xy.row(t.index_of(s.ids[j]))).norm();
        mds = std::max(mds, std::abs(a - b));
      }
  }
  const bool pass = ortho <= 1e-8 && nonincreasing && asym == 0 && diag == 0 && in_range && mds <= 1e-9;
  return {pass, fmt::format("orthonormality {:.1e} (tol 1e-8), variance nonincreasing {}, dist asymmetry {:.1e}, "
                            "diagonal {:.1e}, in [0,2] {}, MDS order drift {:.1e} (tol 1e-9)",
                            ortho, nonincreasing, asym, diag, in_range, mds)};
}

Verdict cluster_recovery() {
  int perfect = 0;
  double worst = 1.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    GeneratorConfig c;
    c.cluster_separation = 20;
    c.seed = seed;
    const auto cat = gen_catalog(c);
    const auto s = build_space(cat.catalog, {10, 5, seed});
    const double ari = adjusted_rand_index(s.cluster, cat.planted_labels);
    worst = std::min(worst, ari);
    perfect += ari == 1.0;
  }
  return {perfect == 20, fmt::format("ARI = 1 on {}/20 seeds, worst {:.4f}", perfect, worst)};
}

Verdict gradient_check() {
  CounterRng rng(99, 3);
  Eigen::MatrixXd x(400, 10);
  Eigen::VectorXd y(400);
  for (int i = 0; i < 400; ++i) {
    for (int j = 0; j < 10; ++j) x(i, j) = rng.normal();
    y[i] = rng.uniform() < 0.45 ? 1.0 : 0.0;
  }
  double worst = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd theta(11);
    for (int j = 0; j < 11; ++j) theta[j] = rng.normal();
    const double lambda = trial % 2 ? 0.05 * rng.uniform() : 0.0;
    const Eigen::VectorXd g = logistic_gradient(x, y, theta, lambda);
    Eigen::VectorXd fd(11);
    for (int j = 0; j < 11; ++j) {
      const double h = 1e-5;
      Eigen::VectorXd up = theta, down = theta;
      up[j] += h;
      down[j] -= h;
      fd[j] = (logistic_loss(x, y, up, lambda) - logistic_loss(x, y, down, lambda)) / (2 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
  }
  return {worst <= 1e-5, fmt::format("20 points, max relative error {:.2e} (tol 1e-5)", worst)};
}

GeneratorConfig planted_config() {
  GeneratorConfig c;
  c.tier_mix.fill(0.0);
  c.tier_mix[static_cast<int>(Tier::Gold)] = 1.0;
  c.cluster_separation = 4;
  c.bottom_side_rate = 0.555;
  c.planted_beta = {{"mean_proficiency", 0.5}, {"congruency", 0.22}, {"diversity", 0.06}, {"mean_generality", 0.03}};
  c.n_matches = 50000;
  c.seed = 1;
  return c;
}

Verdict planted_recovery() {
  const auto corpus = generate(planted_config());
  const auto rows = labeled_rows(table_of(corpus));
  const auto results = ablate(rows, default_feature_subsets());
  std::map<std::string, const AblationResult*> by;
  for (const auto& r : results) by[r.subset] = &r;
  const auto& full = *by.at("all");
  const double bayes = corpus.truth.team_bayes_accuracy;
  const bool near_bayes = std::abs(full.cv_accuracy - bayes) <= 0.02;

  const std::vector<std::string> order{"mean_proficiency", "starting_bottom", "congruency", "diversity", "mean_generality"};
  bool ordered = true;
  for (std::size_t i = 1; i < order.size(); ++i) ordered &= by.at(order[i - 1])->cv_accuracy > by.at(order[i])->cv_accuracy;

  int paired_losses = 0;
  for (const auto& r : results)
    if (r.columns.size() == 1)
      for (std::size_t k = 0; k < r.fold_accuracies.size(); ++k) paired_losses += full.fold_accuracies[k] < r.fold_accuracies[k];

  std::string singles;
  for (const auto& name : order) singles += fmt::format(" {}={:.4f}", name, by.at(name)->cv_accuracy);
  return {near_bayes && ordered && paired_losses == 0,
          fmt::format("full CV {:.4f} vs Bayes {:.4f} (tol 0.02); ordering {}:{}; folds where a single beats full: {}",
                      full.cv_accuracy, bayes, ordered ? "reproduced" : "NOT reproduced", singles, paired_losses)};
}

Verdict side_calibration() {
  GeneratorConfig c;
  c.n_matches = 100000;
  c.bottom_side_rate = 0.508;
  c.bayes_samples = 4;
  c.seed = 17;
  const auto corpus = generate(c);
  std::size_t wins = 0;
  for (const auto& m : corpus.matches) wins += m.teams[m.team_on(Side::Bottom)].outcome == Outcome::Win;
  const double rate = static_cast<double>(wins) / static_cast<double>(corpus.matches.size());

  // The side-only classifier needs only the side indicator, so build its rows directly.
  std::vector<LabeledRow> rows;
  rows.reserve(2 * corpus.matches.size());
  for (const auto& m : corpus.matches)
    for (const auto& t : m.teams) {
      LabeledRow r;
      r.features.starting_bottom = t.side == Side::Bottom ? 1.0 : 0.0;
      r.win = t.outcome == Outcome::Win;
      r.tier = m.tier;
      rows.push_back(r);
    }
  const double side_only = ablate(rows, {{"side", {"starting_bottom"}}}).front().cv_accuracy;
  return {std::abs(rate - 0.508) <= 0.005 && std::abs(side_only - 0.508) <= 0.01,
          fmt::format("bottom win rate {:.4f} (0.508 +/- 0.005) over {} matches; side-only CV accuracy {:.4f} (0.508 +/- 0.01)",
                      rate, corpus.matches.size(), side_only)};
}

DraftState random_draft_to_trade(const SimilaritySpace& space, const std::vector<SyntheticPlayer>& players,
                                 std::uint64_t seed, std::vector<DraftAction>* log = nullptr) {
  CounterRng rng(seed, 13);
  auto s = new_draft(space.ids, rosters_from(players, rng), {Side::Bottom, Side::Top}, seed);
  while (s.phase == Phase::Ban || s.phase == Phase::Pick) {
    auto acts = legal_actions(s);
    const auto a = acts[rng.below(acts.size())];
    s = apply_action(s, a);
    if (log) log->push_back(a);
  }
  return s;
}

Verdict trade_optimizer() {
  GeneratorConfig c;
  c.n_players = 200;
  c.n_matches = 10;
  c.seed = 5;
  const auto cat = gen_catalog(c);
  const auto space = build_space(cat.catalog, {10, 5, 5});
  const auto players = gen_players(c, space);

  int agree = 0, negative_gain = 0, bad_swaps = 0;
  double worst_value = 0;
  for (int inst = 0; inst < 500; ++inst) {
    const auto s = random_draft_to_trade(space, players, 1000 + inst);
    const int team = inst % 2;
    std::array<ChampionId, kTeamSize> champs;
    for (int slot = 0; slot < kTeamSize; ++slot) champs[slot] = *s.picks[team][slot];
    double prof[kTeamSize][kTeamSize];
    for (int slot = 0; slot < kTeamSize; ++slot)
      for (int k = 0; k < kTeamSize; ++k)
        prof[slot][k] = cosine(coord(space, main_of(s.rosters[team][slot])), coord(space, champs[k]));

    std::array<int, kTeamSize> perm{0, 1, 2, 3, 4};
    double best = -1e300;
    int best_swaps = 99;
    std::array<ChampionId, kTeamSize> best_assign;
    do {
      double v = 0;
      for (int slot = 0; slot < kTeamSize; ++slot) v += prof[slot][perm[slot]];
      v /= kTeamSize;
      int cycles = 0;
      std::array<bool, kTeamSize> seen{};
      for (int i = 0; i < kTeamSize; ++i)
        if (!seen[i]) {
          ++cycles;
          for (int j = i; !seen[j]; j = perm[j]) seen[j] = true;
        }
      const int swaps = kTeamSize - cycles;
      std::array<ChampionId, kTeamSize> assign;
      for (int slot = 0; slot < kTeamSize; ++slot) assign[slot] = champs[perm[slot]];
      const bool better = v > best + 1e-12 ||
                          (std::abs(v - best) <= 1e-12 && (swaps < best_swaps || (swaps == best_swaps && assign < best_assign)));
      if (better) best = std::max(best, v), best_swaps = swaps, best_assign = assign;
    } while (std::next_permutation(perm.begin(), perm.end()));

    const auto plan = optimize_trades(s, space, team);
    worst_value = std::max(worst_value, std::abs(plan.optimal_mean_proficiency - best));
    agree += plan.assignment == best_assign && std::abs(plan.optimal_mean_proficiency - best) <= 1e-12;
    negative_gain += plan.mean_proficiency_gain < 0;
    auto applied = champs;
    for (const auto& [a, b] : plan.swaps) std::swap(applied[a], applied[b]);
    bad_swaps += applied != plan.assignment || static_cast<int>(plan.swaps.size()) != best_swaps;
  }
  return {agree == 500 && negative_gain == 0 && bad_swaps == 0,
          fmt::format("{}/500 agree with exhaustive search (max value gap {:.1e}); negative gains {}; swap lists off {}",
                      agree, worst_value, negative_gain, bad_swaps)};
}

// Independent invariant checks on top of the engine's own checker.
std::string broken_invariant(const DraftState& s) {
  std::set<ChampionId> used;
  std::size_t count = 0;
  for (int t = 0; t < 2; ++t) {
    if (s.bans[t].size() > 3) return "more than three bans";
    for (const auto& b : s.bans[t]) used.insert(b), ++count;
    for (const auto& p : s.picks[t])
      if (p) used.insert(*p), ++count;
  }
  if (used.size() != count) return "champion used twice";
  for (const auto& c : used)
    if (s.pool.count(c)) return "used champion still in pool";
  if (used.size() + s.pool.size() != s.champions_in_play.size()) return "champions lost";
  if (s.phase == Phase::Pick && s.bans[0].size() + s.bans[1].size() != 6) return "picking before bans finished";
  if ((s.phase == Phase::Trade || s.phase == Phase::Complete) && s.picks_made(0) + s.picks_made(1) != 10)
    return "trading with empty slots";
  return {};
}

Verdict draft_fuzz() {
  GeneratorConfig c;
  c.n_players = 200;
  c.n_matches = 10;
  c.seed = 6;
  const auto cat = gen_catalog(c);
  const auto space = build_space(cat.catalog, {10, 5, 6});
  const auto players = gen_players(c, space);

  int violations = 0, mutated = 0, accepted_illegal = 0, replay_mismatch = 0, incomplete = 0;
  std::size_t steps = 0, illegal_tried = 0;
  std::string first;
  for (std::uint64_t run = 0; run < 1000; ++run) {
    CounterRng rng(run, 21);
    const auto initial = new_draft(space.ids, rosters_from(players, rng), {Side::Bottom, Side::Top}, run,
                                   run % 2 ? DraftConfig::alternating() : DraftConfig::snake());
    DraftState s = initial;
    std::vector<DraftAction> log;
    while (s.phase != Phase::Complete) {
      const auto acts = legal_actions(s);
      // A few illegal probes per step: another team's turn, a used or unknown
      // champion, a phase-inappropriate action.
      std::vector<DraftAction> probes;
      const int acting = s.acting_team().value_or(0);
      if (!s.pool.empty() && (s.phase == Phase::Ban || s.phase == Phase::Pick)) {
        const auto& c0 = *s.pool.begin();
        probes.push_back(s.phase == Phase::Ban ? DraftAction::ban(1 - acting, c0) : DraftAction::pick(1 - acting, c0));
        probes.push_back(DraftAction::swap(acting, 0, 1));
        probes.push_back(DraftAction::finalize());
      }
      if (!s.bans[0].empty()) probes.push_back(DraftAction::pick(acting, s.bans[0].front()));
      probes.push_back(DraftAction::ban(acting, "not-a-champion"));
      for (const auto& p : probes) {
        if (std::find(acts.begin(), acts.end(), p) != acts.end()) continue;
        ++illegal_tried;
        const DraftState before = s;
        try {
          (void)apply_action(s, p);
          ++accepted_illegal;
        } catch (const IllegalAction&) {
        }
        mutated += !(before == s);
      }
      // Swaps stay legal indefinitely, so finalize a quarter of the time once trading.
      const auto a = s.phase == Phase::Trade && rng.below(4) == 0 ? DraftAction::finalize() : acts[rng.below(acts.size())];
      s = apply_action(s, a);
      log.push_back(a);
      ++steps;
      try {
        check_invariants(s);
      } catch (const Error& e) {
        if (first.empty()) first = e.what();
        ++violations;
      }
      if (const auto why = broken_invariant(s); !why.empty()) {
        if (first.empty()) first = why;
        ++violations;
      }
      if (log.size() > 200) break;
    }
    incomplete += s.phase != Phase::Complete;
    replay_mismatch += !(replay(initial, log) == s);
  }
  const bool pass = violations == 0 && mutated == 0 && accepted_illegal == 0 && replay_mismatch == 0 && incomplete == 0;
  return {pass, fmt::format("1000 runs, {} steps: invariant violations {}{}; {} illegal probes, {} accepted, {} mutated; "
                            "replay mismatches {}; unfinished {}",
                            steps, violations, first.empty() ? "" : " (" + first + ")", illegal_tried, accepted_illegal,
                            mutated, replay_mismatch, incomplete)};
}

GeneratorConfig analytics_config(std::uint64_t seed, std::size_t matches) {
  GeneratorConfig c;
  c.feature_dim = 20;
  c.n_players = 1400;
  c.n_matches = matches;
  c.bayes_samples = 4;
  c.seed = seed;
  return c;
}

Verdict analytics() {
  std::vector<std::string> failures;

  auto base = analytics_config(7, 3001);
  base.bottom_side_rate = 0.6;
  const auto t = table_of(generate(base));
  int asym = 0;
  for (const char* feature : {"mean_proficiency", "congruency", "diversity", "background_diversity", "starting_bottom"})
    for (int bins : {1, 2, 7, 20, 21}) {
      const auto curve = relative_winrate_curve(t, feature, bins);
      for (std::size_t b = 0; b < curve.bins.size(); ++b) {
        const auto& lo = curve.bins[b];
        const auto& hi = curve.bins[curve.bins.size() - 1 - b];
        asym += !(lo.count == hi.count && lo.wins + hi.wins == lo.count && lo.win_rate + hi.win_rate == 1.0 &&
                  lo.lower == -hi.upper && lo.center == -hi.center);
      }
    }
  if (asym) failures.push_back(fmt::format("{} asymmetric bins", asym));

  auto planted = analytics_config(8, 50000);
  planted.tier_mix.fill(0.0);
  planted.tier_mix[static_cast<int>(Tier::Gold)] = 1.0;
  planted.planted_beta = {{"mean_proficiency", 1.5}};
  const auto rising = relative_winrate_curve(table_of(generate(planted)), "mean_proficiency");
  int drops = 0;
  for (std::size_t b = 1; b < rising.bins.size(); ++b) drops += rising.bins[b].win_rate < rising.bins[b - 1].win_rate;
  if (drops) failures.push_back(fmt::format("{} decreasing steps under a planted positive coefficient", drops));

  auto null = planted;
  null.planted_beta.clear();
  null.bottom_side_rate = 0.5;
  const auto null_table = table_of(generate(null));
  double flat = 0;
  for (const char* feature : {"mean_proficiency", "congruency", "diversity"})
    for (const auto& b : relative_winrate_curve(null_table, feature).bins) flat = std::max(flat, std::abs(b.win_rate - 0.5));
  if (flat > 0.02) failures.push_back(fmt::format("null curve deviates {:.4f}", flat));

  auto tiers = analytics_config(12, 21000);
  tiers.tier_mix.fill(1.0 / 7);
  tiers.tier_mix[6] = 1.0 - 6.0 / 7;
  const auto corr = correlation_by_tier(table_of(generate(tiers)), "mean_proficiency", "congruency",
                                        {"starting_bottom", "background_diversity"});
  std::string signs;
  int wrong = 0;
  for (const auto& tc : corr.tiers) {
    const bool elite = tc.tier == Tier::Master || tc.tier == Tier::Challenger;
    const bool ok = elite ? tc.lower > 0 : tc.upper < 0;
    wrong += !ok;
    signs += fmt::format(" {}:{}{:+.3f}", to_string(tc.tier), ok ? "" : "!", tc.coefficient);
  }
  if (wrong || corr.tiers.size() != 7) failures.push_back(fmt::format("{} tiers with the wrong sign", wrong));

  return {failures.empty(),
          fmt::format("antisymmetry exact; planted curve {:.3f}..{:.3f}; null max deviation {:.4f} (tol 0.02); "
                      "proficiency-congruency by tier{}{}",
                      rising.bins.front().win_rate, rising.bins.back().win_rate, flat, signs,
                      failures.empty() ? "" : "; FAILED: " + fmt::format("{}", fmt::join(failures, ", ")))};
}

Verdict service_equivalence() {
  GeneratorConfig c;
  c.feature_dim = 20;
  c.n_players = 400;
  c.n_matches = 2000;
  c.tier_mix.fill(0.0);
  c.tier_mix[static_cast<int>(Tier::Gold)] = 1.0;
  c.seed = 23;
  const auto corpus = generate(c);
  const auto histories = corpus.histories();
  const auto models = train_cells(labeled_rows(compute_feature_table(corpus.space, corpus.matches, histories)), {}, true);
  const auto& model = select_model(models, Region::SYN, Tier::Gold);

  DraftService service(corpus.space, models, histories);
  const int port = service.start();
  httplib::Client client("127.0.0.1", port);

  int rec_equal = 0, rec_total = 0, trade_equal = 0, trade_total = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CounterRng rng(seed, 31);
    const auto rosters = rosters_from(corpus.players, rng);
    Json teams;
    for (int t = 0; t < 2; ++t) {
      Json ids = Json::array();
      for (const auto& h : rosters[t]) ids.push_back(h.player_id);
      teams[std::string(1, team_letter(t))] = ids;
    }
    const auto created = client.Post("/sessions", Json{{"players", teams}, {"seed", seed}, {"tier", "Gold"}}.dump(),
                                     "application/json");
    if (!created || created->status != 201) return {false, "session creation failed"};
    const auto id = Json::parse(created->body).at("session_id").get<std::string>();
    auto state = Json::parse(created->body).at("state").get<DraftState>();
    std::size_t seq = 0;
    while (state.phase == Phase::Ban || state.phase == Phase::Pick) {
      if (state.phase == Phase::Pick) {
        const std::size_t top_n = 1 + rng.below(10);
        const auto r = client.Get(fmt::format("/sessions/{}/recommendations?top_n={}", id, top_n));
        ++rec_total;
        if (r && r->status == 200) {
          const auto served = Json::parse(r->body);
          const auto direct = recommend(state, model, corpus.space, top_n);
          rec_equal += served == Json(direct) && served.get<Recommendation>() == direct;
        }
      }
      const auto acts = legal_actions(state);
      const auto r = client.Post(fmt::format("/sessions/{}/actions", id),
                                 Json{{"seq", seq++}, {"action", acts[rng.below(acts.size())]}}.dump(), "application/json");
      if (!r || r->status != 200) return {false, "action rejected"};
      state = Json::parse(r->body).at("state").get<DraftState>();
    }
    for (int team = 0; team < 2; ++team) {
      const auto r = client.Get(fmt::format("/sessions/{}/trades?team={}", id, team_letter(team)));
      ++trade_total;
      if (r && r->status == 200) {
        const auto served = Json::parse(r->body);
        const auto direct = optimize_trades(state, corpus.space, team);
        trade_equal += served == Json(direct) && served.get<TradePlan>() == direct;
      }
    }
  }
  service.stop();
  return {rec_equal == rec_total && trade_equal == trade_total && rec_total == 100,
          fmt::format("recommendations {}/{} identical, trade plans {}/{} identical", rec_equal, rec_total, trade_equal,
                      trade_total)};
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<Criterion> criteria{
      {"metric-oracle", 10, metric_oracle},
      {"linear-algebra", 60, linear_algebra},
      {"cluster-recovery", 30, cluster_recovery},
      {"gradient-check", 60, gradient_check},
      {"planted-recovery", 300, planted_recovery},
      {"side-calibration", 300, side_calibration},
      {"trade-optimizer", 120, trade_optimizer},
      {"draft-state-machine", 300, draft_fuzz},
      {"analytics", 300, analytics},
      {"service-equivalence", 120, service_equivalence},
  };
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_seconds;
    const bool pass = o.pass && in_time;
    failed += !pass;
    fmt::print("{} {}: {} [{:.1f}s, limit {:.0f}s{}]\n", pass ? "PASS" : "FAIL", c.name, o.detail, secs, c.limit_seconds,
               in_time ? "" : ", over time");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
