// Command-line front end: corpus generation and ingestion, model building,
// analyses, one-shot recommendations, simulated drafts and the HTTP service.

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "teamdesign/analytics.hpp"
#include "teamdesign/provider.hpp"
#include "teamdesign/rng.hpp"
#include "teamdesign/service.hpp"
#include "teamdesign/store.hpp"
#include "teamdesign/synthgen.hpp"

using namespace teamdesign;
namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kProvider = 3 };

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "corpus";
  std::string format = "csv";
  std::string output;  // file instead of stdout
  bool verbose = false;
  Json config = Json::object();

  const Json& section(const char* name) const {
    static const Json empty = Json::object();
    return config.contains(name) ? config.at(name) : empty;
  }
};

void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    io::write_file(g.output, text);
    spdlog::info("wrote {}", g.output);
  }
}

void emit_json(const Globals& g, const Json& j) { emit(g, j.dump(2) + "\n"); }

void emit_table(const Globals& g, const Table& t) {
  if (g.format == "json") {
    Json rows = Json::array();
    for (const auto& r : t.rows) {
      Json obj = Json::object();
      for (std::size_t i = 0; i < t.header.size() && i < r.size(); ++i) obj[t.header[i]] = r[i];
      rows.push_back(obj);
    }
    emit_json(g, rows);
    return;
  }
  std::ostringstream out;
  write_delimited(out, t, g.format == "tsv" ? '\t' : ',');
  emit(g, out.str());
}

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

GeneratorConfig generator_config(const Globals& g) {
  auto c = g.section("generator").get<GeneratorConfig>();
  if (g.seed) c.seed = *g.seed;
  return c;
}

SpaceParams space_params(const Globals& g) {
  auto p = g.section("space").get<SpaceParams>();
  if (g.seed) p.seed = *g.seed;
  return p;
}

TrainOptions train_options(const Globals& g) {
  auto t = g.section("train").get<TrainOptions>();
  if (g.seed) t.seed = *g.seed;
  return t;
}

FeatureTable load_feature_table(const CorpusStore& store) {
  const auto space = store.load_space();
  const auto matches = store.load_matches();
  const auto histories = store.load_histories();
  return compute_feature_table(space, matches, histories);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');)
    if (!item.empty()) out.push_back(item);
  return out;
}

// --- commands -------------------------------------------------------------------------

void gen_corpus(const Globals& g, std::optional<std::size_t> matches, std::optional<std::size_t> players) {
  auto config = generator_config(g);
  if (matches) config.n_matches = *matches;
  if (players) config.n_players = *players;
  const auto corpus = generate(config);
  CorpusStore store(g.out_dir);
  store.set_seed(config.seed);
  store.set_generator(config);
  store.save_catalog(corpus.catalog.catalog);
  store.save_matches(corpus.matches);
  store.save_histories(corpus.histories());
  store.save_space(corpus.space);
  store.save_truth(corpus.truth);
  emit_json(g, Json{{"out_dir", g.out_dir},
                    {"matches", corpus.matches.size()},
                    {"players", corpus.players.size()},
                    {"champions", corpus.space.size()},
                    {"bottom_win_rate_target", corpus.truth.bottom_side_rate},
                    {"team_bayes_accuracy", corpus.truth.team_bayes_accuracy},
                    {"match_bayes_accuracy", corpus.truth.match_bayes_accuracy}});
}

void fetch(const Globals& g, const std::vector<std::string>& seeds, int depth, std::size_t limit) {
  const auto config = g.section("provider").get<ProviderConfig>();
  auto provider = make_provider(config);
  const auto result = snowball_sample(*provider, seeds, depth, limit);
  CorpusStore store(g.out_dir);
  store.save_matches(result.matches);
  store.save_histories(snowball_histories(result));
  Json errors = Json::object();
  for (const auto& [p, e] : result.errors) errors[p] = e;
  emit_json(g, Json{{"matches", result.matches.size()},
                    {"players", result.depth.size()},
                    {"truncated_players", result.truncated_players},
                    {"skipped_records", result.skipped_records},
                    {"errors", errors}});
}

void build_space_cmd(const Globals& g, const std::string& catalog_path) {
  CorpusStore store(g.out_dir);
  ChampionCatalog catalog;
  if (catalog_path.empty()) {
    catalog = store.load_catalog();
  } else {
    std::ifstream in(catalog_path);
    if (!in) throw data_error("cannot open " + catalog_path);
    catalog = io::read_catalog_csv(in);
    store.save_catalog(catalog);
  }
  const auto space = build_space(catalog, space_params(g));
  store.save_space(space);
  Json ratio = Json::array();
  for (Eigen::Index i = 0; i < space.explained_variance_ratio.size(); ++i) ratio.push_back(space.explained_variance_ratio[i]);
  std::vector<int> sizes(static_cast<std::size_t>(space.clusters()), 0);
  for (int c : space.cluster) ++sizes[static_cast<std::size_t>(c - 1)];
  emit_json(g, Json{{"champions", space.size()},
                    {"components", space.components()},
                    {"explained_variance_ratio", ratio},
                    {"dropped_columns", space.dropped_columns},
                    {"cluster_sizes", sizes},
                    {"kmeans_inertia", space.kmeans_inertia}});
}

void compute_features_cmd(const Globals& g) { emit_table(g, io::to_table(load_feature_table(CorpusStore(g.out_dir)))); }

void train_cmd(const Globals& g, bool pooled) {
  CorpusStore store(g.out_dir);
  const auto rows = labeled_rows(load_feature_table(store));
  const auto models = train_cells(rows, train_options(g), pooled);
  store.save_models(models);
  Table t{{"region", "tier", "pooled", "rows", "cv_accuracy", "iterations"}, {}};
  for (const auto& m : models)
    t.rows.push_back({m.pooled ? "*" : std::string(to_string(m.region)), m.pooled ? "*" : std::string(to_string(m.tier)),
                      m.pooled ? "true" : "false",
                      std::to_string(m.training_rows), fmt::format("{:.4f}", m.cv_accuracy), std::to_string(m.iterations)});
  emit_table(g, t);
}

void ablate_cmd(const Globals& g) {
  const auto rows = labeled_rows(load_feature_table(CorpusStore(g.out_dir)));
  const auto results = ablate(rows, default_feature_subsets(), train_options(g));
  if (g.format == "json") {
    emit_json(g, Json(results));
    return;
  }
  Table t{{"subset", "columns", "cv_accuracy"}, {}};
  for (const auto& r : results) t.rows.push_back({r.subset, fmt::format("{}", fmt::join(r.columns, " ")), fmt::format("{:.4f}", r.cv_accuracy)});
  emit_table(g, t);
}

const WinModel& model_for(const std::vector<WinModel>& models, const DraftState& state, const std::string& tier_override) {
  Tier tier = state.rosters[0][0].tier;
  if (!tier_override.empty()) {
    const auto t = parse_tier(tier_override);
    if (!t) throw invalid_argument("unknown tier " + tier_override);
    tier = *t;
  }
  return select_model(models, state.rosters[0][0].region, tier);
}

void recommend_cmd(const Globals& g, const std::string& state_path, std::size_t top_n, const std::string& tier) {
  CorpusStore store(g.out_dir);
  const auto space = store.load_space();
  const auto models = store.load_models();
  const auto state = io::read_json_file(state_path).get<DraftState>();
  if (state.phase == Phase::Trade || state.phase == Phase::Complete) {
    emit_json(g, Json{{"A", optimize_trades(state, space, 0)}, {"B", optimize_trades(state, space, 1)}});
    return;
  }
  if (state.phase != Phase::Pick) throw IllegalAction("recommendations need a state in the pick phase");
  emit_json(g, recommend(state, model_for(models, state, tier), space, top_n));
}

// Each team bans the opponents' most-played available champion, picks its top
// recommendation, then applies its optimal trades.
void simulate_draft(const Globals& g, const std::string& tier_name, bool alternating) {
  CorpusStore store(g.out_dir);
  const auto space = store.load_space();
  const auto models = store.load_models();
  const auto histories = store.load_histories();
  const std::uint64_t seed = seed_or(g, 0);

  std::vector<const PlayerHistory*> candidates;
  std::optional<Tier> tier;
  if (!tier_name.empty()) {
    tier = parse_tier(tier_name);
    if (!tier) throw invalid_argument("unknown tier " + tier_name);
  }
  for (const auto& [id, h] : histories)
    if (h.usable() && (!tier || h.tier == *tier)) candidates.push_back(&h);
  std::sort(candidates.begin(), candidates.end(), [](auto* a, auto* b) { return a->player_id < b->player_id; });
  if (candidates.size() < 10) throw data_error("fewer than ten usable players to draft with");
  CounterRng rng(seed, 0x73696d);
  rng.shuffle(std::span(candidates));
  std::array<TeamRoster, 2> rosters;
  for (int p = 0; p < 10; ++p) rosters[p / 5][p % 5] = *candidates[p];

  const auto config = alternating ? DraftConfig::alternating() : DraftConfig::snake();
  const auto initial = new_draft(space.ids, rosters, {Side::Bottom, Side::Top}, seed, config);
  const auto& model = model_for(models, initial, tier_name);
  DraftState s = initial;
  std::vector<DraftAction> actions;
  auto act = [&](const DraftAction& a) {
    s = apply_action(s, a);
    actions.push_back(a);
  };
  while (s.phase == Phase::Ban) {
    const int team = *s.acting_team();
    std::map<ChampionId, int> counts;
    for (const auto& h : s.rosters[1 - team])
      for (const auto& [c, n] : h.picks)
        if (s.pool.count(c)) counts[c] += n;
    ChampionId target = *s.pool.begin();
    int best = -1;
    for (const auto& [c, n] : counts)
      if (n > best) best = n, target = c;
    act(DraftAction::ban(team, target));
  }
  while (s.phase == Phase::Pick) {
    const auto rec = recommend(s, model, space, 1);
    act(DraftAction::pick(rec.team, rec.candidates.front().champion));
  }
  for (int team = 0; team < 2; ++team)
    for (const auto& [a, b] : optimize_trades(s, space, team).swaps) act(DraftAction::swap(team, a, b));
  act(DraftAction::finalize());

  Json entries = Json::array();
  DraftState cursor = initial;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    entries.push_back({{"sequence", i}, {"actor", actor_of(cursor, actions[i])}, {"action", actions[i]}});
    cursor = apply_action(cursor, actions[i]);
  }
  Json teams = Json::array();
  for (int t = 0; t < 2; ++t) {
    std::array<ChampionId, kTeamSize> champs;
    for (int slot = 0; slot < kTeamSize; ++slot) champs[slot] = *s.picks[t][slot];
    const auto f = team_features(space, champs, s.rosters[t], s.sides[t]);
    teams.push_back({{"team", std::string(1, team_letter(t))}, {"win_probability", predict(model, f)}, {"features", f}});
  }
  emit_json(g, Json{{"initial_state", initial}, {"entries", entries}, {"final_state", s}, {"teams", teams}});
}

void replay_cmd(const Globals& g, const std::string& log_path) {
  const auto doc = io::read_json_file(log_path);
  const auto initial = doc.at("initial_state").get<DraftState>();
  std::vector<DraftAction> actions;
  for (const auto& e : doc.at("entries")) actions.push_back(e.at("action").get<DraftAction>());
  const auto final_state = replay(initial, actions);
  if (doc.contains("final_state") && doc.at("final_state").get<DraftState>() != final_state)
    throw data_error("replayed state differs from the recorded final state");
  emit_json(g, final_state);
}

void analyze_tiers(const Globals& g) { emit_table(g, to_table(tier_profile(load_feature_table(CorpusStore(g.out_dir))))); }

void analyze_curve(const Globals& g, const std::string& feature, int bins) {
  emit_table(g, to_table(relative_winrate_curve(load_feature_table(CorpusStore(g.out_dir)), feature, bins)));
}

void analyze_pickorder(const Globals& g, bool low_diversity) {
  emit_table(g, to_table(pick_order_proficiency(load_feature_table(CorpusStore(g.out_dir)), {low_diversity})));
}

void analyze_correlate(const Globals& g, const std::string& x, const std::string& y, const std::string& controls) {
  emit_table(g, to_table(correlation_by_tier(load_feature_table(CorpusStore(g.out_dir)), x, y, split_list(controls))));
}

void serve_cmd(const Globals& g, std::string host, int port) {
  const auto& section = g.section("service");
  if (host.empty()) host = section.value("host", std::string("127.0.0.1"));
  if (port < 0) port = section.value("port", 8080);
  ServiceOptions options;
  options.default_top_n = section.value("top_n", options.default_top_n);
  CorpusStore store(g.out_dir);
  DraftService service(store.load_space(), store.load_models(), store.load_histories(), options);
  service.run(host, port);
}

int exit_code_for(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::InvalidArgument: return kUsage;
    case Error::Kind::Provider:
    case Error::Kind::Auth: return kProvider;
    default: return kData;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team composition analytics and draft assistant"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config_path, "JSON config with generator/space/train/provider/service sections")
      ->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Seed overriding every configured seed");
  app.add_option("--out-dir", g.out_dir, "Corpus store directory")->capture_default_str();
  app.add_option("--format", g.format, "Table output format")->check(CLI::IsMember({"csv", "tsv", "json"}))->capture_default_str();
  app.add_option("-o,--output", g.output, "Write the result to a file instead of stdout");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  std::function<void()> run;

  std::optional<std::size_t> n_matches, n_players;
  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus with planted effects");
  gen->add_option("--matches", n_matches, "Number of matches");
  gen->add_option("--players", n_players, "Number of players");
  gen->callback([&] { run = [&] { gen_corpus(g, n_matches, n_players); }; });

  std::vector<std::string> seeds;
  int depth = 1;
  std::size_t limit = 60;
  auto* fetch_cmd = app.add_subcommand("fetch", "Snowball-sample match histories through the configured provider");
  fetch_cmd->add_option("--seeds", seeds, "Seed player ids")->required()->delimiter(',');
  fetch_cmd->add_option("--depth", depth, "Expansion depth")->capture_default_str()->check(CLI::NonNegativeNumber);
  fetch_cmd->add_option("--limit", limit, "Matches per player")->capture_default_str()->check(CLI::PositiveNumber);
  fetch_cmd->callback([&] { run = [&] { fetch(g, seeds, depth, limit); }; });

  std::string catalog_path;
  auto* space = app.add_subcommand("build-space", "Build the champion similarity space");
  space->add_option("--catalog", catalog_path, "Champion feature CSV (default: the store's catalog)")->check(CLI::ExistingFile);
  space->callback([&] { run = [&] { build_space_cmd(g, catalog_path); }; });

  app.add_subcommand("compute-features", "Per-team feature table")->callback([&] { run = [&] { compute_features_cmd(g); }; });

  bool pooled = true;
  auto* train = app.add_subcommand("train", "Train per-cell win models");
  train->add_flag("--pooled,!--no-pooled", pooled, "Also train a model over all cells")->capture_default_str();
  train->callback([&] { run = [&] { train_cmd(g, pooled); }; });

  app.add_subcommand("ablate", "Cross-validated accuracy of feature subsets")->callback([&] { run = [&] { ablate_cmd(g); }; });

  auto* analyze = app.add_subcommand("analyze", "Descriptive analyses");
  analyze->require_subcommand(1);
  analyze->fallthrough();
  analyze->add_subcommand("tiers", "Feature means by tier, division and outcome")->callback([&] { run = [&] { analyze_tiers(g); }; });
  std::string feature = "mean_proficiency";
  int bins = 20;
  auto* curve = analyze->add_subcommand("curve", "Win rate against a relative feature value");
  curve->add_option("--feature", feature)->capture_default_str();
  curve->add_option("--bins", bins)->capture_default_str()->check(CLI::PositiveNumber);
  curve->callback([&] { run = [&] { analyze_curve(g, feature, bins); }; });
  bool low_diversity = false;
  auto* pick = analyze->add_subcommand("pickorder", "Proficiency by pick position and tier");
  pick->add_flag("--low-background-diversity", low_diversity, "Only the bottom decile of background diversity");
  pick->callback([&] { run = [&] { analyze_pickorder(g, low_diversity); }; });
  std::string x_feature = "mean_proficiency", y_feature = "congruency", controls;
  auto* corr = analyze->add_subcommand("correlate", "Per-tier regression coefficient of y on x");
  corr->add_option("--x", x_feature)->capture_default_str();
  corr->add_option("--y", y_feature)->capture_default_str();
  corr->add_option("--controls", controls, "Comma-separated assignment features");
  corr->callback([&] { run = [&] { analyze_correlate(g, x_feature, y_feature, controls); }; });

  std::string state_path, tier;
  std::size_t top_n = 5;
  auto* rec = app.add_subcommand("recommend", "Recommendations (pick phase) or trade plans (trade phase) for a saved state");
  rec->add_option("--state", state_path, "DraftState JSON")->required()->check(CLI::ExistingFile);
  rec->add_option("--top-n", top_n)->capture_default_str()->check(CLI::PositiveNumber);
  rec->add_option("--tier", tier, "Model cell to use (default: the roster's tier)");
  rec->callback([&] { run = [&] { recommend_cmd(g, state_path, top_n, tier); }; });

  bool alternating = false;
  auto* sim = app.add_subcommand("simulate-draft", "Play a full draft with recommendation-following teams");
  sim->add_option("--tier", tier, "Draw players from this tier");
  sim->add_flag("--alternating", alternating, "Strict A,B alternation instead of the snake order");
  sim->callback([&] { run = [&] { simulate_draft(g, tier, alternating); }; });

  std::string log_path;
  auto* rep = app.add_subcommand("replay", "Replay an action log and print the final state");
  rep->add_option("log", log_path, "Log JSON with initial_state and entries")->required()->check(CLI::ExistingFile);
  rep->callback([&] { run = [&] { replay_cmd(g, log_path); }; });

  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP draft service");
  serve->add_option("--host", host, "Bind address (default 127.0.0.1)");
  serve->add_option("--port", port, "Port (default 8080)");
  serve->callback([&] { run = [&] { serve_cmd(g, host, port); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("teamdesign"));
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);
  try {
    if (!g.config_path.empty()) g.config = io::read_json_file(g.config_path);
    if (!g.config.is_object()) throw invalid_argument("config must be a JSON object");
    run();
    return kOk;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("malformed input: {}", e.what());
    return kData;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kData;
  }
}
