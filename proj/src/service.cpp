#include "teamdesign/service.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "teamdesign/io.hpp"

namespace teamdesign {

const WinModel& select_model(const std::vector<WinModel>& models, Region region, Tier tier) {
  if (models.empty()) throw invalid_argument("no win models loaded");
  for (const auto& m : models)
    if (!m.pooled && m.region == region && m.tier == tier) return m;
  for (const auto& m : models)
    if (m.pooled) return m;
  return models.front();
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

int status_for(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::NotFound: return 404;
    case Error::Kind::Illegal: return 422;
    case Error::Kind::InvalidArgument:
    case Error::Kind::Data: return 400;
    default: return 500;
  }
}

std::string_view kind_name(Error::Kind kind) {
  switch (kind) {
    case Error::Kind::InvalidArgument: return "invalid_argument";
    case Error::Kind::Data: return "data";
    case Error::Kind::NotFound: return "not_found";
    case Error::Kind::Illegal: return "illegal_action";
    case Error::Kind::Convergence: return "convergence";
    case Error::Kind::Provider: return "provider";
    case Error::Kind::Auth: return "auth";
  }
  return "error";
}

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view error, const std::string& message) {
  reply(res, status, Json{{"error", error}, {"message", message}});
}

int parse_team(const Json& j) {
  if (j.is_number_integer()) {
    const int t = j.get<int>();
    if (t == 0 || t == 1) return t;
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "A") return 0;
    if (s == "B") return 1;
  }
  throw invalid_argument("team must be \"A\" or \"B\"");
}

std::size_t parse_count(const std::string& text, const char* what) {
  std::size_t used = 0;
  long long v = -1;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
  }
  if (used != text.size() || v < 1) throw invalid_argument(fmt::format("{} must be a positive integer", what));
  return static_cast<std::size_t>(v);
}

struct LogEntry {
  std::string session_id;
  std::size_t sequence = 0;
  std::string actor;
  DraftAction action;
  std::string timestamp;
};

Json to_json_entry(const LogEntry& e) {
  return Json{{"session_id", e.session_id}, {"sequence", e.sequence}, {"actor", e.actor}, {"action", e.action},
              {"timestamp", e.timestamp}};
}

struct Session {
  std::string id;
  Region region = Region::SYN;
  Tier tier = Tier::Bronze;
  const WinModel* model = nullptr;
  DraftState initial;
  DraftState state;
  std::vector<LogEntry> log;
  mutable std::shared_mutex mutex;

  std::size_t seq() const { return log.size(); }
};

}  // namespace

struct DraftService::Impl {
  SimilaritySpace space;
  std::vector<WinModel> models;
  HistoryIndex histories;
  ServiceOptions options;

  httplib::Server server;
  std::thread worker;
  std::atomic<std::uint64_t> next_id{1};
  mutable std::shared_mutex sessions_mutex;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  Impl(SimilaritySpace s, std::vector<WinModel> m, HistoryIndex h, ServiceOptions o)
      : space(std::move(s)), models(std::move(m)), histories(std::move(h)), options(o) {
    if (models.empty()) throw invalid_argument("the service needs at least one win model");
    routes();
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::shared_lock lock(sessions_mutex);
    const auto it = sessions.find(id);
    if (it == sessions.end()) throw not_found("unknown session " + id);
    return it->second;
  }

  // Runs a handler, mapping library errors onto status codes.
  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
      try {
        f(req, res);
      } catch (const IllegalAction& e) {
        reply_error(res, 422, "illegal_action", e.what());
      } catch (const Error& e) {
        reply_error(res, status_for(e.kind()), kind_name(e.kind()), e.what());
      } catch (const nlohmann::json::exception& e) {
        reply_error(res, 400, "malformed", e.what());
      }
    };
  }

  Json session_view(const Session& s) const {
    return Json{{"session_id", s.id},
                {"seq", s.seq()},
                {"region", to_string(s.region)},
                {"tier", to_string(s.tier)},
                {"state", s.state}};
  }

  TeamRoster roster_from(const Json& entries) const {
    if (!entries.is_array() || entries.size() != kTeamSize) throw invalid_argument("each team needs five players");
    TeamRoster roster;
    for (std::size_t i = 0; i < kTeamSize; ++i)
      roster[i] = entries[i].is_string() ? require_history(histories, entries[i].get<std::string>())
                                         : entries[i].get<PlayerHistory>();
    return roster;
  }

  Json body_of(const httplib::Request& req) const {
    if (req.body.empty()) return Json::object();
    try {
      return Json::parse(req.body);
    } catch (const nlohmann::json::exception& e) {
      throw invalid_argument(std::string("request body is not valid JSON: ") + e.what());
    }
  }

  void create(const httplib::Request& req, httplib::Response& res) {
    const Json body = body_of(req);
    if (!body.is_object()) throw invalid_argument("request body must be an object");
    const Json& teams = body.contains("rosters") ? body.at("rosters") : body.at("players");
    std::array<TeamRoster, 2> rosters{roster_from(teams.at("A")), roster_from(teams.at("B"))};

    std::array<Side, 2> sides{Side::Bottom, Side::Top};
    if (body.contains("sides")) {
      for (int t = 0; t < 2; ++t) {
        const auto s = parse_side(body.at("sides").at(std::string(1, team_letter(t))).get<std::string>());
        if (!s) throw invalid_argument("side must be Top or Bottom");
        sides[t] = *s;
      }
    }
    std::vector<ChampionId> pool = body.contains("pool") ? body.at("pool").get<std::vector<ChampionId>>() : space.ids;
    for (const auto& c : pool)
      if (!space.contains(c)) throw invalid_argument("champion " + c + " is not in the similarity space");
    const DraftConfig config = body.contains("config") ? body.at("config").get<DraftConfig>() : DraftConfig{};
    const std::uint64_t seed = body.value("seed", std::uint64_t{0});

    auto session = std::make_shared<Session>();
    session->region = rosters[0][0].region;
    session->tier = rosters[0][0].tier;
    if (body.contains("region")) {
      const auto r = parse_region(body.at("region").get<std::string>());
      if (!r) throw invalid_argument("unknown region");
      session->region = *r;
    }
    if (body.contains("tier")) {
      const auto t = parse_tier(body.at("tier").get<std::string>());
      if (!t) throw invalid_argument("unknown tier");
      session->tier = *t;
    }
    session->model = &select_model(models, session->region, session->tier);
    session->initial = new_draft(pool, rosters, sides, seed, config);
    session->state = session->initial;

    {
      std::unique_lock lock(sessions_mutex);
      if (sessions.size() >= options.max_sessions) throw Error(Error::Kind::Provider, "session limit reached");
      session->id = fmt::format("S{:08d}", next_id++);
      sessions.emplace(session->id, session);
    }
    spdlog::info("session {} created ({} {}, seed {})", session->id, to_string(session->region),
                 to_string(session->tier), seed);
    std::shared_lock lock(session->mutex);
    reply(res, 201, session_view(*session));
  }

  void act(const httplib::Request& req, httplib::Response& res) {
    auto session = find(req.path_params.at("id"));
    const Json body = body_of(req);
    if (!body.is_object() || !body.contains("seq") || !body.at("seq").is_number_unsigned())
      throw invalid_argument("body must carry a non-negative integer seq");
    if (!body.contains("action")) throw invalid_argument("body must carry an action");
    const auto seq = body.at("seq").get<std::size_t>();
    const auto action = body.at("action").get<DraftAction>();

    std::unique_lock lock(session->mutex);
    if (seq != session->seq()) {
      reply(res, 409,
            Json{{"error", "stale_sequence"},
                 {"message", fmt::format("sequence {} is stale; current sequence is {}", seq, session->seq())},
                 {"seq", session->seq()}});
      return;
    }
    DraftState next = apply_action(session->state, action);
    session->log.push_back({session->id, seq, actor_of(session->state, action), action, utc_timestamp()});
    session->state = std::move(next);
    spdlog::debug("session {} #{}: {}", session->id, seq, describe(action));
    reply(res, 200, session_view(*session));
  }

  std::pair<DraftState, const WinModel*> snapshot(const Session& s) const {
    std::shared_lock lock(s.mutex);
    return {s.state, s.model};
  }

  void recommendations(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.path_params.at("id"));
    std::size_t top_n = options.default_top_n;
    if (req.has_param("top_n")) top_n = std::min(parse_count(req.get_param_value("top_n"), "top_n"), options.max_top_n);
    const auto [state, model] = snapshot(*session);
    if (state.phase != Phase::Pick) throw IllegalAction("recommendations are only available during the pick phase");
    reply(res, 200, recommend(state, *model, space, top_n, nullptr, options.features));
  }

  void trades(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.path_params.at("id"));
    const int team = req.has_param("team") ? parse_team(Json(req.get_param_value("team"))) : 0;
    const auto [state, model] = snapshot(*session);
    reply(res, 200, optimize_trades(state, space, team, options.features));
  }

  void log(const httplib::Request& req, httplib::Response& res) {
    const auto session = find(req.path_params.at("id"));
    std::shared_lock lock(session->mutex);
    Json entries = Json::array();
    for (const auto& e : session->log) entries.push_back(to_json_entry(e));
    reply(res, 200, Json{{"session_id", session->id}, {"initial_state", session->initial}, {"entries", entries}});
  }

  void projection(httplib::Response& res) const {
    Json champions = Json::array();
    for (std::size_t i = 0; i < space.size(); ++i)
      champions.push_back(
          {{"id", space.ids[i]}, {"x", space.mds_xy(i, 0)}, {"y", space.mds_xy(i, 1)}, {"cluster", space.cluster[i]}});
    reply(res, 200, Json{{"clusters", space.clusters()}, {"champions", champions}});
  }

  void routes() {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(sessions_mutex);
      reply(res, 200, Json{{"status", "ok"}, {"sessions", sessions.size()}, {"models", models.size()}});
    });
    server.Get("/projection", guarded([this](const httplib::Request&, httplib::Response& res) { projection(res); }));
    server.Post("/sessions", guarded([this](const httplib::Request& q, httplib::Response& r) { create(q, r); }));
    server.Get("/sessions/:id", guarded([this](const httplib::Request& q, httplib::Response& r) {
      const auto session = find(q.path_params.at("id"));
      std::shared_lock lock(session->mutex);
      reply(r, 200, session_view(*session));
    }));
    server.Post("/sessions/:id/actions", guarded([this](const httplib::Request& q, httplib::Response& r) { act(q, r); }));
    server.Get("/sessions/:id/recommendations",
               guarded([this](const httplib::Request& q, httplib::Response& r) { recommendations(q, r); }));
    server.Get("/sessions/:id/trades", guarded([this](const httplib::Request& q, httplib::Response& r) { trades(q, r); }));
    server.Get("/sessions/:id/log", guarded([this](const httplib::Request& q, httplib::Response& r) { log(q, r); }));
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string message = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        message = e.what();
      } catch (...) {
      }
      spdlog::error("unhandled: {}", message);
      reply_error(res, 500, "internal", message);
    });
  }
};

DraftService::DraftService(SimilaritySpace space, std::vector<WinModel> models, HistoryIndex histories,
                           ServiceOptions options)
    : impl_(std::make_unique<Impl>(std::move(space), std::move(models), std::move(histories), options)) {}

DraftService::~DraftService() { stop(); }

int DraftService::start(const std::string& host, int port) {
  if (impl_->worker.joinable()) throw invalid_argument("service already started");
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw invalid_argument(fmt::format("cannot bind {}:{}", host, port));
  impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void DraftService::run(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) throw invalid_argument(fmt::format("cannot bind {}:{}", host, port));
  spdlog::info("serving on {}:{}", host, port);
  impl_->server.listen_after_bind();
}

void DraftService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

std::size_t DraftService::session_count() const {
  std::shared_lock lock(impl_->sessions_mutex);
  return impl_->sessions.size();
}

}  // namespace teamdesign
