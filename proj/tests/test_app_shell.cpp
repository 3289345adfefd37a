#include <doctest.h>
#include <fmt/format.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "teamdesign/analytics.hpp"
#include "teamdesign/provider.hpp"
#include "teamdesign/store.hpp"
#include "teamdesign/synthgen.hpp"

// After Eigen: <resolv.h> defines a _res macro that clashes with it.
#include <httplib.h>

using namespace teamdesign;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("teamdesign_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

const SyntheticCorpus& corpus() {
  static const SyntheticCorpus c = [] {
    GeneratorConfig g;
    g.feature_dim = 16;
    g.n_players = 300;
    g.n_matches = 400;
    g.seed = 21;
    return generate(g);
  }();
  return c;
}

MatchRecord simple_match(const std::string& id, const std::array<std::string, 10>& players, Tier tier = Tier::Gold,
                         int division = 2) {
  MatchRecord m;
  m.match_id = id;
  m.region = Region::NA;
  m.tier = tier;
  m.division = division;
  for (int t = 0; t < 2; ++t) {
    m.teams[t].side = t == 0 ? Side::Bottom : Side::Top;
    m.teams[t].outcome = t == 0 ? Outcome::Win : Outcome::Loss;
    for (int s = 0; s < kTeamSize; ++s) {
      auto& slot = m.teams[t].slots[s];
      slot.player = players[t * 5 + s];
      slot.champion = fmt::format("CH{:03d}", t * 5 + s);
      slot.pick_index = s + 1;
    }
  }
  return m;
}

// Matches for player "P" against fresh opponents, numbered from `first`.
std::vector<MatchRecord> matches_for(const std::string& player, int count, int first = 0) {
  std::vector<MatchRecord> out;
  for (int i = first; i < first + count; ++i) {
    std::array<std::string, 10> ps;
    ps[0] = player;
    for (int k = 1; k < 10; ++k) ps[k] = fmt::format("O{}_{}", i, k);
    out.push_back(simple_match(fmt::format("M{:04d}", i), ps));
  }
  return out;
}

void write_raw(const fs::path& path, const std::vector<Json>& records) {
  std::ofstream out(path);
  for (const auto& r : records) out << r.dump() << '\n';
}

std::vector<Json> as_json(const std::vector<MatchRecord>& ms) {
  std::vector<Json> out;
  for (const auto& m : ms) out.push_back(m);
  return out;
}

struct ScopedEnv {
  std::string name;
  ScopedEnv(std::string n, const char* value) : name(std::move(n)) {
    if (value)
      ::setenv(name.c_str(), value, 1);
    else
      ::unsetenv(name.c_str());
  }
  ~ScopedEnv() { ::unsetenv(name.c_str()); }
};

// Local match-history server with injectable faults.
struct FaultServer {
  std::vector<Json> records;
  std::set<std::size_t> malformed;
  std::string token = "secret-token";
  int fail_first = 0;       // this many requests answer with `fail_status`
  int fail_status = 503;
  bool fail_forever = false;
  std::atomic<int> requests{0};

  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    server.Get("/players/:player/matches", [this](const httplib::Request& req, httplib::Response& res) {
      const int n = requests++;
      if (req.get_header_value("X-Api-Token") != token) {
        res.status = 401;
        return;
      }
      if (fail_forever || n < fail_first) {
        res.status = fail_status;
        if (fail_status == 429) res.set_header("Retry-After", "0");
        return;
      }
      const auto start = std::stoul(req.get_param_value("start"));
      const auto count = std::stoul(req.get_param_value("count"));
      Json page{{"data", {{"items", Json::array()}}}};
      for (std::size_t i = start; i < std::min(records.size(), start + count); ++i) {
        if (malformed.count(i)) {
          Json bad = records[i];
          bad["teams"][1].erase("slots");
          page["data"]["items"].push_back(bad);
        } else {
          page["data"]["items"].push_back(records[i]);
        }
      }
      res.set_content(page.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FaultServer() {
    server.stop();
    if (thread.joinable()) thread.join();
  }
};

ProviderConfig remote_config(int port) {
  ProviderConfig c;
  c.mode = ProviderConfig::Mode::Remote;
  c.base_url = "http://127.0.0.1:" + std::to_string(port);
  c.token_env = "TEAMDESIGN_TEST_TOKEN";
  c.page_size = 20;
  c.rate_limit = 1000;
  c.retry = {3, std::chrono::milliseconds(1), 2.0};
  c.timeout = std::chrono::milliseconds(2000);
  c.mapping.records = "/data/items";
  return c;
}

// Fixture provider that fails for chosen players.
class FlakyProvider : public MatchProvider {
 public:
  FlakyProvider(MatchProvider& inner, std::set<PlayerId> broken) : inner_(inner), broken_(std::move(broken)) {}
  FetchResult fetch_match_history(const PlayerId& player, std::size_t limit) override {
    if (broken_.count(player)) throw Error(Error::Kind::Provider, "upstream failure for " + player);
    return inner_.fetch_match_history(player, limit);
  }

 private:
  MatchProvider& inner_;
  std::set<PlayerId> broken_;
};

}  // namespace

// --- io ----------------------------------------------------------------------

TEST_CASE("matches and histories round-trip through JSONL") {
  const auto dir = scratch_dir("io");
  const auto& c = corpus();
  io::write_matches((dir / "m.jsonl").string(), c.matches);
  const auto back = io::read_matches((dir / "m.jsonl").string());
  REQUIRE(back.size() == c.matches.size());
  for (std::size_t i = 0; i < back.size(); ++i) CHECK(back[i] == c.matches[i]);

  const auto h = c.histories();
  io::write_histories((dir / "h.jsonl").string(), h);
  CHECK(io::read_histories((dir / "h.jsonl").string()) == h);
  fs::remove_all(dir);
}

TEST_CASE("bad JSONL lines report their line number") {
  std::istringstream in(Json(corpus().matches[0]).dump() + "\n{\"match_id\": 3}\n");
  try {
    io::read_jsonl<MatchRecord>(in, "matches");
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::Data);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("space, models, config and draft state round-trip through JSON") {
  const auto& c = corpus();
  const auto space = Json(c.space).get<SimilaritySpace>();
  CHECK(space.ids == c.space.ids);
  CHECK(space.cluster == c.space.cluster);
  CHECK(space.coords == c.space.coords);
  CHECK(space.loadings == c.space.loadings);
  CHECK(space.mds_xy == c.space.mds_xy);
  CHECK((space.dist - c.space.dist).cwiseAbs().maxCoeff() == 0.0);

  const auto table = compute_feature_table(c.space, c.matches, c.histories());
  const auto rows = labeled_rows(table);
  const auto model = train(rows, Region::SYN, Tier::Gold);
  const auto m2 = Json(model).get<WinModel>();
  CHECK(m2.weights == model.weights);
  CHECK(m2.intercept == model.intercept);
  CHECK(m2.feature_order == model.feature_order);
  CHECK(m2.fold_accuracies == model.fold_accuracies);

  const auto g = Json(c.config).get<GeneratorConfig>();
  CHECK(Json(g) == Json(c.config));

  std::array<TeamRoster, 2> rosters;
  const auto h = c.histories();
  auto it = h.begin();
  for (int p = 0; p < 10; ++p, ++it) rosters[p / 5][p % 5] = it->second;
  auto state = new_draft(c.space.ids, rosters, {Side::Top, Side::Bottom}, 5);
  for (int k = 0; k < 9; ++k) state = apply_action(state, legal_actions(state).front());
  CHECK(Json(state).get<DraftState>() == state);
}

TEST_CASE("envelope rejects other formats and versions") {
  const Json doc = io::envelope("win_models", Json::array());
  CHECK_NOTHROW(io::open_envelope(doc, "win_models"));
  CHECK_THROWS_AS(io::open_envelope(doc, "similarity_space"), Error);
  Json newer = doc;
  newer["version"] = io::kFormatVersion + 1;
  CHECK_THROWS_AS(io::open_envelope(newer, "win_models"), Error);
}

TEST_CASE("generator config rejects unknown keys") {
  CHECK_THROWS_AS(Json({{"n_matchez", 3}}).get<GeneratorConfig>(), Error);
  const auto g = Json({{"tier_mix", {{"Gold", 1.0}}}}).get<GeneratorConfig>();
  CHECK(g.tier_mix[static_cast<int>(Tier::Gold)] == 1.0);
  CHECK(g.tier_mix[static_cast<int>(Tier::Bronze)] == 0.0);
}

// --- store -------------------------------------------------------------------

TEST_CASE("corpus store round-trips and detects tampering") {
  const auto dir = scratch_dir("store");
  const auto& c = corpus();
  const auto table = compute_feature_table(c.space, c.matches, c.histories());
  const std::vector<WinModel> models{train(labeled_rows(table), Region::SYN, Tier::Gold)};
  {
    CorpusStore store(dir);
    store.set_seed(c.config.seed);
    store.set_generator(c.config);
    store.save_catalog(c.catalog.catalog);
    store.save_matches(c.matches);
    store.save_histories(c.histories());
    store.save_space(c.space);
    store.save_models(models);
    store.save_truth(c.truth);
  }
  CorpusStore store(dir);
  CHECK(store.manifest().seed == c.config.seed);
  CHECK(store.manifest().files.size() == 6);
  CHECK_NOTHROW(store.verify());
  const auto cat = store.load_catalog();
  CHECK(cat.ids == c.catalog.catalog.ids);
  CHECK(cat.features == c.catalog.catalog.features);
  CHECK(store.load_matches() == c.matches);
  CHECK(store.load_histories() == c.histories());
  CHECK(store.load_space().coords == c.space.coords);
  CHECK(store.load_models()[0].weights == models[0].weights);
  const auto truth = store.load_truth();
  CHECK(truth.side_offset == c.truth.side_offset);
  CHECK(truth.matches.size() == c.truth.matches.size());

  {
    std::ofstream out(dir / CorpusStore::kMatches, std::ios::app);
    out << "\n";
  }
  CHECK_THROWS_AS(store.load_matches(), Error);
  CHECK_THROWS_AS(store.verify(), Error);
  CHECK_NOTHROW(store.load_space());

  // A manifest from a newer format version is refused.
  Json manifest = io::read_json_file((dir / CorpusStore::kManifest).string());
  manifest["version"] = io::kFormatVersion + 1;
  io::write_json_file((dir / CorpusStore::kManifest).string(), manifest);
  CHECK_THROWS_AS(CorpusStore{dir}, Error);
  fs::remove_all(dir);
}

TEST_CASE("store refuses paths outside its root") {
  const auto dir = scratch_dir("escape");
  CorpusStore store(dir);
  CHECK_THROWS_AS(store.save_file("../evil.txt", "x"), Error);
  CHECK_THROWS_AS(store.load_file("missing.txt"), Error);
  fs::remove_all(dir);
}

// --- providers -----------------------------------------------------------------

TEST_CASE("fixture provider: full and short sources") {
  const auto dir = scratch_dir("fixture");
  auto records = as_json(matches_for("P", 60));
  const auto more = as_json(matches_for("Q", 10, 100));
  records.insert(records.end(), more.begin(), more.end());
  write_raw(dir / "f.jsonl", records);

  FixtureProvider provider((dir / "f.jsonl").string(), {});
  const auto p = provider.fetch_match_history("P", 60);
  CHECK(p.matches.size() == 60);
  CHECK_FALSE(p.truncated);
  CHECK(p.matches.front().match_id == "M0000");

  const auto q = provider.fetch_match_history("Q", 60);
  CHECK(q.matches.size() == 10);
  CHECK(q.truncated);

  CHECK(provider.fetch_match_history("P", 5).matches.size() == 5);
  CHECK(provider.fetch_match_history("nobody", 60).matches.empty());
  CHECK_THROWS_AS(provider.fetch_match_history("P", 0), Error);
  fs::remove_all(dir);
}

TEST_CASE("field mapping translates a vendor-shaped record") {
  const auto m = simple_match("X1", {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"});
  Json raw{{"info", {{"gameId", 991}, {"platform", "na1"}, {"queueTier", "GOLD"}, {"rank", "2"}}}, {"sides", Json::array()}};
  for (int t = 0; t < 2; ++t) {
    Json team{{"teamId", t == 0 ? 200 : 100}, {"won", t == 0}, {"members", Json::array()}};
    for (const auto& s : m.teams[t].slots)
      team["members"].push_back({{"summoner", s.player}, {"champ", s.champion}, {"order", s.pick_index}});
    raw["sides"].push_back(team);
  }
  FieldMapping f;
  f.match_id = "/info/gameId";
  f.region = "/info/platform";
  f.tier = "/info/queueTier";
  f.division = "/info/rank";
  f.teams = "/sides";
  f.side = "/teamId";
  f.outcome = "/won";
  f.slots = "/members";
  f.player = "/summoner";
  f.champion = "/champ";
  f.pick_index = "/order";
  f.region_values = {{"na1", "NA"}};
  f.tier_values = {{"GOLD", "Gold"}};
  f.side_values = {{"100", "Top"}, {"200", "Bottom"}};
  f.outcome_values = {{"true", "Win"}, {"false", "Loss"}};
  auto got = map_record(raw, f);
  auto want = m;
  want.match_id = "991";
  CHECK(got == want);

  raw["sides"][0]["members"].erase(0);
  CHECK_THROWS_AS(map_record(raw, f), Error);
}

TEST_CASE("provider config keeps tokens out of files") {
  CHECK_THROWS_AS(Json({{"mode", "Remote"}, {"base_url", "http://x"}, {"auth_token", "abc"}}).get<ProviderConfig>(),
                  Error);
  auto c = Json({{"mode", "Remote"}, {"base_url", "http://x"}, {"token_env", "TOK"}, {"rate_limit", 2.5}})
               .get<ProviderConfig>();
  CHECK(c.mode == ProviderConfig::Mode::Remote);
  CHECK(c.rate_limit == 2.5);
  CHECK_NOTHROW(c.validate());
  c.token_env.clear();
  CHECK_THROWS_AS(c.validate(), Error);
  ProviderConfig fixture;
  CHECK_THROWS_AS(fixture.validate(), Error);
}

TEST_CASE("remote provider skips one malformed record in fifty") {
  FaultServer server;
  server.records = as_json(matches_for("P", 50));
  server.malformed = {17};
  server.start();
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  RemoteProvider provider(remote_config(server.port));
  const auto r = provider.fetch_match_history("P", 60);
  CHECK(r.matches.size() == 49);
  CHECK(r.skipped == 1);
  CHECK(r.truncated);
  for (const auto& m : r.matches) CHECK(m.match_id != "M0017");
  CHECK(provider.requests_sent() == 3);  // pages of 20, 20 and a short 10
}

TEST_CASE("remote provider paginates up to the limit") {
  FaultServer server;
  server.records = as_json(matches_for("P", 100));
  server.start();
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  RemoteProvider provider(remote_config(server.port));
  const auto r = provider.fetch_match_history("P", 60);
  REQUIRE(r.matches.size() == 60);
  CHECK_FALSE(r.truncated);
  for (int i = 0; i < 60; ++i) CHECK(r.matches[i].match_id == fmt::format("M{:04d}", i));
  CHECK(provider.requests_sent() == 3);
}

TEST_CASE("remote provider authentication failures") {
  FaultServer server;
  server.records = as_json(matches_for("P", 5));
  server.start();
  {
    ScopedEnv env("TEAMDESIGN_TEST_TOKEN", nullptr);
    try {
      RemoteProvider provider(remote_config(server.port));
      FAIL("expected an auth error");
    } catch (const Error& e) {
      CHECK(e.kind() == Error::Kind::Auth);
    }
  }
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "wrong");
  RemoteProvider provider(remote_config(server.port));
  try {
    provider.fetch_match_history("P", 5);
    FAIL("expected an auth error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::Auth);
  }
  CHECK(server.requests == 1);  // no retries on auth failures
}

TEST_CASE("remote provider retries transient failures") {
  FaultServer server;
  server.records = as_json(matches_for("P", 10));
  server.fail_first = 2;
  server.start();
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  RemoteProvider provider(remote_config(server.port));
  const auto r = provider.fetch_match_history("P", 10);
  CHECK(r.matches.size() == 10);
  CHECK_FALSE(r.truncated);
  CHECK(server.requests == 3);
}

TEST_CASE("remote provider truncates after persistent server errors") {
  FaultServer server;
  server.records = as_json(matches_for("P", 10));
  server.fail_forever = true;
  server.start();
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  RemoteProvider provider(remote_config(server.port));
  const auto r = provider.fetch_match_history("P", 10);
  CHECK(r.matches.empty());
  CHECK(r.truncated);
  CHECK(r.notes.size() == 1);
  CHECK(server.requests == 3);
}

TEST_CASE("remote provider gives up when the rate limit never clears") {
  FaultServer server;
  server.records = as_json(matches_for("P", 10));
  server.fail_forever = true;
  server.fail_status = 429;
  server.start();
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  RemoteProvider provider(remote_config(server.port));
  try {
    provider.fetch_match_history("P", 10);
    FAIL("expected a provider error");
  } catch (const Error& e) {
    CHECK(e.kind() == Error::Kind::Provider);
  }
  CHECK(server.requests == 3);
}

TEST_CASE("unreachable remote truncates rather than throwing") {
  ScopedEnv env("TEAMDESIGN_TEST_TOKEN", "secret-token");
  auto cfg = remote_config(1);
  cfg.timeout = std::chrono::milliseconds(200);
  RemoteProvider provider(cfg);
  const auto r = provider.fetch_match_history("P", 10);
  CHECK(r.truncated);
  CHECK(r.matches.empty());
}

TEST_CASE("rate limiter spaces requests") {
  RateLimiter limiter(200.0);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 21; ++i) limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - t0;
  CHECK(elapsed >= std::chrono::milliseconds(99));
}

// --- snowball sampling ---------------------------------------------------------------

namespace {

std::array<std::string, 10> names(std::initializer_list<std::string> first, const std::string& prefix) {
  std::array<std::string, 10> out;
  std::size_t i = 0;
  for (const auto& f : first) out[i++] = f;
  for (int k = 1; i < 10; ++i, ++k) out[i] = prefix + std::to_string(k);
  return out;
}

// S1 plays M1 (with a1..a4, b1..b5) and M3 (against S2 and d1..d4, with e1..e4).
// a1 also plays M2 (with c1..c9); c1 also plays M4 (with f1..f9).
std::vector<MatchRecord> graph() {
  auto m1 = simple_match("M1", {"S1", "a1", "a2", "a3", "a4", "b1", "b2", "b3", "b4", "b5"}, Tier::Gold, 2);
  auto m2 = simple_match("M2", names({"a1"}, "c"), Tier::Silver, 1);
  auto m3 = simple_match("M3", {"S2", "d1", "d2", "d3", "d4", "S1", "e1", "e2", "e3", "e4"}, Tier::Platinum, 3);
  auto m4 = simple_match("M4", names({"c1"}, "f"), Tier::Bronze, 4);
  return {m1, m2, m3, m4};
}

std::set<std::string> ids(const SnowballResult& r) {
  std::set<std::string> out;
  for (const auto& m : r.matches) out.insert(m.match_id);
  return out;
}

}  // namespace

TEST_CASE("snowball sampling closure by depth") {
  const auto dir = scratch_dir("snowball");
  write_raw(dir / "g.jsonl", as_json(graph()));
  FixtureProvider provider((dir / "g.jsonl").string(), {});

  const auto d0 = snowball_sample(provider, {"S1", "S2"}, 0, 60);
  CHECK(ids(d0) == std::set<std::string>{"M1", "M3"});
  CHECK(d0.matches.size() == 2);  // M3 belongs to both seeds but is kept once
  CHECK(d0.depth.size() == 2);

  const auto d1 = snowball_sample(provider, {"S1", "S2"}, 1, 60);
  CHECK(ids(d1) == std::set<std::string>{"M1", "M2", "M3"});
  CHECK(d1.depth.size() == 19);
  CHECK(d1.depth.at("a1") == 1);
  CHECK(d1.seed_of.at("a1") == "S1");

  const auto d2 = snowball_sample(provider, {"S1", "S2"}, 2, 60);
  CHECK(ids(d2) == std::set<std::string>{"M1", "M2", "M3", "M4"});
  CHECK(d2.depth.size() == 28);
  CHECK(d2.depth.at("c5") == 2);
  for (const auto& m : d2.matches) {
    if (m.match_id == "M2" || m.match_id == "M4") {
      // Fetched for non-seed players: rank inherited from seed S1's first match.
      CHECK(m.tier == Tier::Gold);
      CHECK(m.division == 2);
    }
    if (m.match_id == "M3") CHECK(m.tier == Tier::Platinum);
  }
  const auto h = snowball_histories(d2);
  CHECK(h.at("c1").tier == Tier::Gold);
  CHECK(h.at("c1").division == 2);
  CHECK(h.at("S2").tier == Tier::Platinum);
  CHECK(h.at("c1").total == 2);

  CHECK(snowball_sample(provider, {"S1", "S2"}, 5, 60).depth.size() == 37);
  CHECK_THROWS_AS(snowball_sample(provider, {}, 1, 60), Error);
  fs::remove_all(dir);
}

TEST_CASE("snowball sampling continues past per-player failures") {
  const auto dir = scratch_dir("snowball_err");
  write_raw(dir / "g.jsonl", as_json(graph()));
  FixtureProvider inner((dir / "g.jsonl").string(), {});
  FlakyProvider provider(inner, {"a1", "S2"});
  const auto r = snowball_sample(provider, {"S1", "S2"}, 2, 60);
  CHECK(r.errors.size() == 2);
  CHECK(r.errors.count("a1") == 1);
  CHECK(ids(r) == std::set<std::string>{"M1", "M3"});
  fs::remove_all(dir);
}
