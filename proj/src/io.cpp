#include "teamdesign/io.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <fstream>
#include <set>
#include <sstream>

namespace teamdesign {

namespace {

template <typename E>
E enum_field(const Json& j, const char* key, std::optional<E> (*parse)(std::string_view)) {
  const auto s = j.at(key).get<std::string>();
  const auto v = parse(s);
  if (!v) throw data_error(fmt::format("unknown {} '{}'", key, s));
  return *v;
}

Json vec_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vec_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json mat_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd mat_from(const Json& j, Eigen::Index cols_if_empty = 0) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows ? static_cast<Eigen::Index>(j[0].size()) : cols_if_empty;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& r = j[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(r.size()) != cols) throw data_error("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

Json tier_array_json(const TierArray& a) {
  Json j = Json::object();
  for (int t = 0; t < kTierCount; ++t) j[std::string(to_string(kAllTiers[t]))] = a[t];
  return j;
}

// Accepts either seven numbers or an object keyed by tier name (missing tiers
// keep their current value).
template <typename T, typename A>
void tier_array_from(const Json& j, A& a) {
  if (j.is_array()) {
    if (j.size() != kTierCount) throw data_error("per-tier arrays need seven entries");
    for (int t = 0; t < kTierCount; ++t) a[t] = j[static_cast<std::size_t>(t)].template get<T>();
    return;
  }
  for (const auto& [k, v] : j.items()) {
    const auto tier = parse_tier(k);
    if (!tier) throw data_error("unknown tier '" + k + "'");
    a[static_cast<int>(*tier)] = v.template get<T>();
  }
}

template <typename T>
void maybe(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(Json& j, const TeamSlot& v) {
  j = Json{{"player", v.player}, {"champion", v.champion}, {"pick_index", v.pick_index}};
}
void from_json(const Json& j, TeamSlot& v) {
  v.player = j.at("player").get<std::string>();
  v.champion = j.at("champion").get<std::string>();
  v.pick_index = j.value("pick_index", 0);
}

void to_json(Json& j, const TeamRecord& v) {
  j = Json{{"side", to_string(v.side)}, {"outcome", to_string(v.outcome)}, {"slots", v.slots}};
}
void from_json(const Json& j, TeamRecord& v) {
  v.side = enum_field(j, "side", parse_side);
  v.outcome = enum_field(j, "outcome", parse_outcome);
  const auto& slots = j.at("slots");
  if (slots.size() != kTeamSize) throw data_error("a team needs five slots");
  for (std::size_t i = 0; i < kTeamSize; ++i) v.slots[i] = slots[i].get<TeamSlot>();
}

void to_json(Json& j, const MatchRecord& v) {
  j = Json{{"match_id", v.match_id}, {"region", to_string(v.region)}, {"tier", to_string(v.tier)},
           {"division", v.division}, {"teams", v.teams}};
}
void from_json(const Json& j, MatchRecord& v) {
  v.match_id = j.at("match_id").get<std::string>();
  v.region = enum_field(j, "region", parse_region);
  v.tier = enum_field(j, "tier", parse_tier);
  v.division = j.at("division").get<int>();
  const auto& teams = j.at("teams");
  if (teams.size() != 2) throw data_error("a match needs two teams");
  v.teams[0] = teams[0].get<TeamRecord>();
  v.teams[1] = teams[1].get<TeamRecord>();
  validate(v);
}

void to_json(Json& j, const PlayerHistory& v) {
  j = Json{{"player_id", v.player_id}, {"region", to_string(v.region)}, {"tier", to_string(v.tier)},
           {"division", v.division}, {"total", v.total}, {"picks", v.picks}};
}
void from_json(const Json& j, PlayerHistory& v) {
  v.player_id = j.at("player_id").get<std::string>();
  v.region = enum_field(j, "region", parse_region);
  v.tier = enum_field(j, "tier", parse_tier);
  v.division = j.at("division").get<int>();
  v.picks = j.at("picks").get<std::map<ChampionId, int>>();
  int total = 0;
  for (const auto& [c, n] : v.picks) {
    if (n < 1) throw data_error("pick counts must be positive");
    total += n;
  }
  v.total = j.value("total", total);
  if (v.total != total) throw data_error("history total does not match its pick counts");
}

void to_json(Json& j, const SpaceParams& v) {
  j = Json{{"components", v.components}, {"clusters", v.clusters}, {"seed", v.seed}, {"restarts", v.restarts},
           {"max_iterations", v.max_iterations}};
}
void from_json(const Json& j, SpaceParams& v) {
  maybe(j, "components", v.components);
  maybe(j, "clusters", v.clusters);
  maybe(j, "seed", v.seed);
  maybe(j, "restarts", v.restarts);
  maybe(j, "max_iterations", v.max_iterations);
}

void to_json(Json& j, const SimilaritySpace& v) {
  j = Json{{"params", v.params},
           {"feature_names", v.feature_names},
           {"ids", v.ids},
           {"mean", vec_json(v.mean)},
           {"std", vec_json(v.std)},
           {"dropped_columns", v.dropped_columns},
           {"loadings", mat_json(v.loadings)},
           {"explained_variance", vec_json(v.explained_variance)},
           {"explained_variance_ratio", vec_json(v.explained_variance_ratio)},
           {"coords", mat_json(v.coords)},
           {"cluster", v.cluster},
           {"mds_xy", mat_json(v.mds_xy)},
           {"kmeans_inertia", v.kmeans_inertia}};
}
void from_json(const Json& j, SimilaritySpace& v) {
  v.params = j.at("params").get<SpaceParams>();
  v.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  v.ids = j.at("ids").get<std::vector<ChampionId>>();
  v.mean = vec_from(j.at("mean"));
  v.std = vec_from(j.at("std"));
  v.dropped_columns = j.at("dropped_columns").get<std::vector<int>>();
  v.loadings = mat_from(j.at("loadings"));
  v.explained_variance = vec_from(j.at("explained_variance"));
  v.explained_variance_ratio = vec_from(j.at("explained_variance_ratio"));
  v.coords = mat_from(j.at("coords"), v.loadings.cols());
  v.cluster = j.at("cluster").get<std::vector<int>>();
  v.mds_xy = mat_from(j.at("mds_xy"), 2);
  v.kmeans_inertia = j.at("kmeans_inertia").get<double>();
  const auto n = static_cast<Eigen::Index>(v.ids.size());
  const auto d = static_cast<Eigen::Index>(v.feature_names.size());
  if (v.coords.rows() != n || v.cluster.size() != v.ids.size() || v.mds_xy.rows() != n || v.mean.size() != d ||
      v.std.size() != d || v.loadings.rows() != d || v.coords.cols() != v.loadings.cols())
    throw data_error("space artifact has inconsistent shapes");
  for (int c : v.cluster)
    if (c < 1 || c > v.params.clusters) throw data_error("space artifact has cluster labels out of range");
  v.dist = cosine_distance_matrix(v.coords);
  v.reindex();
}

void to_json(Json& j, const TeamFeatureVector& v) {
  j = Json::object();
  const auto values = v.values();
  for (std::size_t i = 0; i < kFeatureCount; ++i) j[std::string(kFeatureNames[i])] = values[i];
}
void from_json(const Json& j, TeamFeatureVector& v) {
  std::array<double, kFeatureCount> values{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) values[i] = j.at(std::string(kFeatureNames[i])).get<double>();
  v = TeamFeatureVector::from_values(values);
}

void to_json(Json& j, const WinModel& v) {
  j = Json{{"region", to_string(v.region)},
           {"tier", to_string(v.tier)},
           {"pooled", v.pooled},
           {"feature_order", v.feature_order},
           {"feature_means", vec_json(v.feature_means)},
           {"feature_stds", vec_json(v.feature_stds)},
           {"weights", vec_json(v.weights)},
           {"intercept", v.intercept},
           {"l2_lambda", v.l2_lambda},
           {"cv_accuracy", v.cv_accuracy},
           {"fold_accuracies", v.fold_accuracies},
           {"training_rows", v.training_rows},
           {"iterations", v.iterations},
           {"gradient_norm", v.gradient_norm}};
}
void from_json(const Json& j, WinModel& v) {
  v.region = enum_field(j, "region", parse_region);
  v.tier = enum_field(j, "tier", parse_tier);
  v.pooled = j.at("pooled").get<bool>();
  v.feature_order = j.at("feature_order").get<std::vector<std::string>>();
  v.feature_means = vec_from(j.at("feature_means"));
  v.feature_stds = vec_from(j.at("feature_stds"));
  v.weights = vec_from(j.at("weights"));
  v.intercept = j.at("intercept").get<double>();
  v.l2_lambda = j.at("l2_lambda").get<double>();
  v.cv_accuracy = j.at("cv_accuracy").get<double>();
  v.fold_accuracies = j.at("fold_accuracies").get<std::vector<double>>();
  v.training_rows = j.at("training_rows").get<std::size_t>();
  v.iterations = j.at("iterations").get<int>();
  v.gradient_norm = j.at("gradient_norm").get<double>();
  const auto n = v.feature_order.size();
  if (static_cast<std::size_t>(v.weights.size()) != n || static_cast<std::size_t>(v.feature_means.size()) != n ||
      static_cast<std::size_t>(v.feature_stds.size()) != n)
    throw data_error("model artifact has inconsistent column counts");
  for (const auto& name : v.feature_order)
    if (!feature_column(name)) throw data_error("model artifact names an unknown feature: " + name);
}

void to_json(Json& j, const TrainOptions& v) {
  j = Json{{"folds", v.folds}, {"l2_lambda", v.l2_lambda}, {"seed", v.seed}, {"columns", v.columns},
           {"max_iterations", v.max_iterations}, {"gradient_tolerance", v.gradient_tolerance}};
}
void from_json(const Json& j, TrainOptions& v) {
  maybe(j, "folds", v.folds);
  maybe(j, "l2_lambda", v.l2_lambda);
  maybe(j, "seed", v.seed);
  maybe(j, "columns", v.columns);
  maybe(j, "max_iterations", v.max_iterations);
  maybe(j, "gradient_tolerance", v.gradient_tolerance);
}

void to_json(Json& j, const GeneratorConfig& v) {
  std::array<bool, kTierCount> off = v.fifth_pick_off_main;
  Json fifth = Json::object();
  for (int t = 0; t < kTierCount; ++t) fifth[std::string(to_string(kAllTiers[t]))] = off[t];
  j = Json{{"n_champions", v.n_champions},
           {"feature_dim", v.feature_dim},
           {"n_clusters", v.n_clusters},
           {"cluster_separation", v.cluster_separation},
           {"n_players", v.n_players},
           {"tier_mix", tier_array_json(v.tier_mix)},
           {"preference_concentration", tier_array_json(v.preference_concentration)},
           {"champions_per_player", v.champions_per_player},
           {"role_focus", v.role_focus},
           {"cluster_popularity", v.cluster_popularity},
           {"picks_per_player", v.picks_per_player},
           {"focus_mean", tier_array_json(v.focus_mean)},
           {"focus_spread", v.focus_spread},
           {"coordination", tier_array_json(v.coordination)},
           {"fifth_pick_off_main", fifth},
           {"bans_per_team", v.bans_per_team},
           {"n_matches", v.n_matches},
           {"planted_beta", v.planted_beta},
           {"bottom_side_rate", v.bottom_side_rate},
           {"bayes_samples", v.bayes_samples},
           {"space_components", v.space_components},
           {"seed", v.seed}};
}
void from_json(const Json& j, GeneratorConfig& v) {
  static const std::set<std::string> known{
      "n_champions", "feature_dim", "n_clusters", "cluster_separation", "n_players", "tier_mix",
      "preference_concentration", "champions_per_player", "role_focus", "cluster_popularity", "picks_per_player",
      "focus_mean", "focus_spread", "coordination", "fifth_pick_off_main", "bans_per_team", "n_matches",
      "planted_beta", "bottom_side_rate", "bayes_samples", "space_components", "seed"};
  for (const auto& [k, _] : j.items())
    if (!known.count(k)) throw data_error("unknown generator setting '" + k + "'");
  maybe(j, "n_champions", v.n_champions);
  maybe(j, "feature_dim", v.feature_dim);
  maybe(j, "n_clusters", v.n_clusters);
  maybe(j, "cluster_separation", v.cluster_separation);
  maybe(j, "n_players", v.n_players);
  if (j.contains("tier_mix")) {
    // A partial tier_mix means "only these tiers".
    if (j.at("tier_mix").is_object()) v.tier_mix.fill(0.0);
    tier_array_from<double>(j.at("tier_mix"), v.tier_mix);
  }
  if (j.contains("preference_concentration"))
    tier_array_from<double>(j.at("preference_concentration"), v.preference_concentration);
  maybe(j, "champions_per_player", v.champions_per_player);
  maybe(j, "role_focus", v.role_focus);
  maybe(j, "cluster_popularity", v.cluster_popularity);
  maybe(j, "picks_per_player", v.picks_per_player);
  if (j.contains("focus_mean")) tier_array_from<double>(j.at("focus_mean"), v.focus_mean);
  maybe(j, "focus_spread", v.focus_spread);
  if (j.contains("coordination")) tier_array_from<double>(j.at("coordination"), v.coordination);
  if (j.contains("fifth_pick_off_main")) tier_array_from<bool>(j.at("fifth_pick_off_main"), v.fifth_pick_off_main);
  maybe(j, "bans_per_team", v.bans_per_team);
  maybe(j, "n_matches", v.n_matches);
  maybe(j, "planted_beta", v.planted_beta);
  maybe(j, "bottom_side_rate", v.bottom_side_rate);
  maybe(j, "bayes_samples", v.bayes_samples);
  maybe(j, "space_components", v.space_components);
  maybe(j, "seed", v.seed);
}

void to_json(Json& j, const MatchTruth& v) {
  j = Json{{"match_id", v.match_id}, {"p_bottom", v.p_bottom}, {"q_bottom", v.q_bottom}, {"q_top", v.q_top}};
}
void from_json(const Json& j, MatchTruth& v) {
  v.match_id = j.at("match_id").get<std::string>();
  v.p_bottom = j.at("p_bottom").get<double>();
  v.q_bottom = j.at("q_bottom").get<double>();
  v.q_top = j.at("q_top").get<double>();
}

void to_json(Json& j, const GroundTruth& v) {
  Json mean = Json::object(), sd = Json::object();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    mean[std::string(kFeatureNames[i])] = v.feature_mean[i];
    sd[std::string(kFeatureNames[i])] = v.feature_std[i];
  }
  j = Json{{"planted_beta", v.planted_beta},
           {"bottom_side_rate", v.bottom_side_rate},
           {"side_offset", v.side_offset},
           {"feature_mean", mean},
           {"feature_std", sd},
           {"match_bayes_accuracy", v.match_bayes_accuracy},
           {"team_bayes_accuracy", v.team_bayes_accuracy},
           {"planted_labels", v.planted_labels},
           {"matches", v.matches}};
}
void from_json(const Json& j, GroundTruth& v) {
  v.planted_beta = j.at("planted_beta").get<std::map<std::string, double>>();
  v.bottom_side_rate = j.at("bottom_side_rate").get<double>();
  v.side_offset = j.at("side_offset").get<double>();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    v.feature_mean[i] = j.at("feature_mean").at(std::string(kFeatureNames[i])).get<double>();
    v.feature_std[i] = j.at("feature_std").at(std::string(kFeatureNames[i])).get<double>();
  }
  v.match_bayes_accuracy = j.at("match_bayes_accuracy").get<double>();
  v.team_bayes_accuracy = j.at("team_bayes_accuracy").get<double>();
  v.planted_labels = j.at("planted_labels").get<std::vector<int>>();
  v.matches = j.at("matches").get<std::vector<MatchTruth>>();
}

void to_json(Json& j, const DraftConfig& v) {
  Json picks = Json::array();
  for (const auto& [team, pos] : v.pick_sequence) picks.push_back({std::string(1, team_letter(team)), pos});
  Json bans = Json::array();
  for (int t : v.ban_sequence) bans.push_back(std::string(1, team_letter(t)));
  j = Json{{"ban_sequence", bans}, {"pick_sequence", picks}};
}

namespace {
int team_from(const Json& j) {
  if (j.is_number_integer()) return j.get<int>();
  const auto s = j.get<std::string>();
  if (s == "A") return 0;
  if (s == "B") return 1;
  throw data_error("unknown team '" + s + "'");
}
}  // namespace

void from_json(const Json& j, DraftConfig& v) {
  v.ban_sequence.clear();
  v.pick_sequence.clear();
  for (const auto& t : j.at("ban_sequence")) v.ban_sequence.push_back(team_from(t));
  for (const auto& p : j.at("pick_sequence")) v.pick_sequence.emplace_back(team_from(p.at(0)), p.at(1).get<int>());
  try {
    v.validate();
  } catch (const Error& e) {
    throw data_error(e.what());
  }
}

void to_json(Json& j, const DraftAction& v) {
  j = Json{{"kind", to_string(v.kind)}};
  switch (v.kind) {
    case DraftAction::Kind::Ban:
    case DraftAction::Kind::Pick:
      j["team"] = std::string(1, team_letter(v.team));
      j["champion"] = v.champion;
      break;
    case DraftAction::Kind::Swap:
      j["team"] = std::string(1, team_letter(v.team));
      j["slots"] = {v.slot_a, v.slot_b};
      break;
    case DraftAction::Kind::Finalize:
      break;
  }
}
void from_json(const Json& j, DraftAction& v) {
  const auto kind = enum_field(j, "kind", parse_action_kind);
  switch (kind) {
    case DraftAction::Kind::Ban:
      v = DraftAction::ban(team_from(j.at("team")), j.at("champion").get<std::string>());
      break;
    case DraftAction::Kind::Pick:
      v = DraftAction::pick(team_from(j.at("team")), j.at("champion").get<std::string>());
      break;
    case DraftAction::Kind::Swap: {
      const auto& s = j.at("slots");
      if (s.size() != 2) throw data_error("a swap names two slots");
      v = DraftAction::swap(team_from(j.at("team")), s[0].get<int>(), s[1].get<int>());
      break;
    }
    case DraftAction::Kind::Finalize:
      v = DraftAction::finalize();
      break;
  }
}

void to_json(Json& j, const DraftState& v) {
  Json picks = Json::array();
  for (const auto& team : v.picks) {
    Json t = Json::array();
    for (const auto& p : team) t.push_back(p ? Json(*p) : Json(nullptr));
    picks.push_back(std::move(t));
  }
  Json rosters = Json::array();
  for (const auto& team : v.rosters) rosters.push_back(Json(team));
  j = Json{{"phase", to_string(v.phase)},
           {"config", v.config},
           {"seed", v.seed},
           {"champions_in_play", v.champions_in_play},
           {"pool", v.pool},
           {"bans", v.bans},
           {"picks", picks},
           {"rosters", rosters},
           {"sides", {to_string(v.sides[0]), to_string(v.sides[1])}},
           {"pick_order", v.pick_order},
           {"ban_cursor", v.ban_cursor},
           {"turn_cursor", v.turn_cursor}};
  if (auto t = v.acting_team()) {
    j["acting_team"] = std::string(1, team_letter(*t));
    j["acting_slot"] = *v.acting_slot();
  }
}
void from_json(const Json& j, DraftState& v) {
  v.phase = enum_field(j, "phase", parse_phase);
  v.config = j.at("config").get<DraftConfig>();
  v.seed = j.at("seed").get<std::uint64_t>();
  v.champions_in_play = j.at("champions_in_play").get<std::vector<ChampionId>>();
  if (!std::is_sorted(v.champions_in_play.begin(), v.champions_in_play.end()))
    throw data_error("champions_in_play must be sorted");
  v.pool = j.at("pool").get<std::set<ChampionId>>();
  v.bans = j.at("bans").get<std::array<std::vector<ChampionId>, 2>>();
  const auto& picks = j.at("picks");
  if (picks.size() != 2) throw data_error("picks needs two teams");
  for (std::size_t t = 0; t < 2; ++t) {
    if (picks[t].size() != kTeamSize) throw data_error("picks needs five slots per team");
    for (std::size_t s = 0; s < kTeamSize; ++s)
      v.picks[t][s] = picks[t][s].is_null() ? std::nullopt : std::optional<ChampionId>(picks[t][s].get<std::string>());
  }
  v.rosters = j.at("rosters").get<std::array<TeamRoster, 2>>();
  const auto& sides = j.at("sides");
  for (std::size_t t = 0; t < 2; ++t) {
    const auto s = parse_side(sides.at(t).get<std::string>());
    if (!s) throw data_error("unknown side");
    v.sides[t] = *s;
  }
  v.pick_order = j.at("pick_order").get<std::array<std::array<int, kTeamSize>, 2>>();
  for (const auto& order : v.pick_order) {
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, kTeamSize>{0, 1, 2, 3, 4}) throw data_error("pick_order must permute slots 0..4");
  }
  v.ban_cursor = j.at("ban_cursor").get<std::size_t>();
  v.turn_cursor = j.at("turn_cursor").get<std::size_t>();
  if (v.ban_cursor > v.config.ban_sequence.size() || v.turn_cursor > v.config.pick_sequence.size())
    throw data_error("draft cursors out of range");
  check_invariants(v);
}

void to_json(Json& j, const Candidate& v) {
  j = Json{{"champion", v.champion},
           {"win_probability", v.win_probability},
           {"proficiency_component", v.proficiency_component},
           {"congruency_after", v.congruency_after},
           {"diversity_after", v.diversity_after},
           {"explanation", v.explanation}};
}
void from_json(const Json& j, Candidate& v) {
  v.champion = j.at("champion").get<std::string>();
  v.win_probability = j.at("win_probability").get<double>();
  v.proficiency_component = j.at("proficiency_component").get<double>();
  v.congruency_after = j.at("congruency_after").get<int>();
  v.diversity_after = j.at("diversity_after").get<double>();
  v.explanation = j.at("explanation").get<std::string>();
}

void to_json(Json& j, const Recommendation& v) {
  j = Json{{"team", std::string(1, team_letter(v.team))}, {"slot", v.slot}, {"candidates", v.candidates}};
}
void from_json(const Json& j, Recommendation& v) {
  v.team = team_from(j.at("team"));
  v.slot = j.at("slot").get<int>();
  v.candidates = j.at("candidates").get<std::vector<Candidate>>();
}

void to_json(Json& j, const TradePlan& v) {
  Json swaps = Json::array();
  for (const auto& [a, b] : v.swaps) swaps.push_back({a, b});
  j = Json{{"team", std::string(1, team_letter(v.team))},
           {"assignment", v.assignment},
           {"current_mean_proficiency", v.current_mean_proficiency},
           {"optimal_mean_proficiency", v.optimal_mean_proficiency},
           {"mean_proficiency_gain", v.mean_proficiency_gain},
           {"swaps", swaps}};
}
void from_json(const Json& j, TradePlan& v) {
  v.team = team_from(j.at("team"));
  v.assignment = j.at("assignment").get<std::array<ChampionId, kTeamSize>>();
  v.current_mean_proficiency = j.at("current_mean_proficiency").get<double>();
  v.optimal_mean_proficiency = j.at("optimal_mean_proficiency").get<double>();
  v.mean_proficiency_gain = j.at("mean_proficiency_gain").get<double>();
  v.swaps.clear();
  for (const auto& s : j.at("swaps")) v.swaps.emplace_back(s.at(0).get<int>(), s.at(1).get<int>());
}

void to_json(Json& j, const AblationResult& v) {
  j = Json{{"subset", v.subset}, {"columns", v.columns}, {"cv_accuracy", v.cv_accuracy},
           {"fold_accuracies", v.fold_accuracies}};
}

namespace io {

Json envelope(const std::string& format, Json payload) {
  return Json{{"format", format}, {"version", kFormatVersion}, {"data", std::move(payload)}};
}

Json open_envelope(const Json& doc, const std::string& format) {
  if (!doc.is_object() || !doc.contains("format") || !doc.contains("version") || !doc.contains("data"))
    throw data_error("expected a '" + format + "' document with format, version and data");
  const auto f = doc.at("format").get<std::string>();
  if (f != format) throw data_error("expected format '" + format + "', found '" + f + "'");
  const int v = doc.at("version").get<int>();
  if (v != kFormatVersion) throw data_error(fmt::format("unsupported {} version {} (expected {})", format, v, kFormatVersion));
  return doc.at("data");
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw data_error(what + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data_error("cannot write " + path);
  out << bytes;
  if (!out) throw data_error("failed writing " + path);
}

Json read_json_file(const std::string& path) { return parse_json(read_file(path), path); }

void write_json_file(const std::string& path, const Json& j) { write_file(path, j.dump(2) + "\n"); }

ChampionCatalog read_catalog_csv(std::istream& in) {
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw data_error("catalog is empty");
  auto header = split(line);
  if (header.size() < 2 || header[0] != "champion_id") throw data_error("catalog header must start with champion_id");
  ChampionCatalog c;
  c.feature_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  for (std::size_t n = 2; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw data_error(fmt::format("catalog line {}: expected {} fields, found {}", n, header.size(), cells.size()));
    c.ids.push_back(cells[0]);
    std::vector<double> r;
    for (std::size_t k = 1; k < cells.size(); ++k) {
      std::size_t used = 0;
      double x = 0;
      try {
        x = std::stod(cells[k], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[k].size() || cells[k].empty() || !std::isfinite(x))
        throw data_error(fmt::format("catalog line {}: bad number '{}' in column {}", n, cells[k], header[k]));
      r.push_back(x);
    }
    rows.push_back(std::move(r));
  }
  c.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(c.feature_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      c.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  c.validate();
  return c;
}

void write_catalog_csv(std::ostream& out, const ChampionCatalog& catalog) {
  out << "champion_id";
  for (const auto& f : catalog.feature_names) out << ',' << f;
  out << '\n';
  for (std::size_t i = 0; i < catalog.ids.size(); ++i) {
    out << catalog.ids[i];
    for (Eigen::Index k = 0; k < catalog.features.cols(); ++k)
      out << ',' << fmt::format("{}", catalog.features(static_cast<Eigen::Index>(i), k));
    out << '\n';
  }
}

std::vector<MatchRecord> read_matches(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  return read_jsonl<MatchRecord>(in, path);
}

void write_matches(const std::string& path, const std::vector<MatchRecord>& matches) {
  std::ostringstream out;
  write_jsonl(out, matches);
  write_file(path, out.str());
}

HistoryIndex read_histories(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open " + path);
  HistoryIndex idx;
  for (auto& h : read_jsonl<PlayerHistory>(in, path)) {
    const auto id = h.player_id;
    if (!idx.emplace(id, std::move(h)).second) throw data_error(path + ": duplicate history for " + id);
  }
  return idx;
}

std::string histories_jsonl(const HistoryIndex& histories) {
  std::vector<const PlayerHistory*> sorted;
  for (const auto& [id, h] : histories) sorted.push_back(&h);
  std::sort(sorted.begin(), sorted.end(),
            [](const PlayerHistory* a, const PlayerHistory* b) { return a->player_id < b->player_id; });
  std::ostringstream out;
  for (const auto* h : sorted) out << Json(*h).dump() << '\n';
  return out.str();
}

void write_histories(const std::string& path, const HistoryIndex& histories) {
  write_file(path, histories_jsonl(histories));
}

Table to_table(const FeatureTable& table) {
  Table t;
  t.header = {"match_id", "team", "side", "region", "tier", "division", "win"};
  for (auto name : kFeatureNames) t.header.emplace_back(name);
  for (const auto& r : table.rows) {
    std::vector<std::string> row{r.match_id,
                                 std::string(1, team_letter(r.team)),
                                 std::string(to_string(r.side)),
                                 std::string(to_string(r.region)),
                                 std::string(to_string(r.tier)),
                                 std::to_string(r.division),
                                 r.win ? "1" : "0"};
    for (double v : r.features.values()) row.push_back(fmt::format("{}", v));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(Error::Kind::Data, "sha256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

}  // namespace io
}  // namespace teamdesign
