#include "teamdesign/provider.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <deque>
#include <fstream>
#include <set>
#include <thread>

namespace teamdesign {

namespace {

std::string raw_text(const Json& j) { return j.is_string() ? j.get<std::string>() : j.dump(); }

const Json& at_pointer(const Json& j, const std::string& pointer, const char* field) {
  try {
    return j.at(Json::json_pointer(pointer));
  } catch (const nlohmann::json::exception&) {
    throw data_error(fmt::format("missing {} at '{}'", field, pointer));
  }
}

std::string mapped(const Json& j, const std::string& pointer, const char* field,
                   const std::map<std::string, std::string>& values) {
  const std::string raw = raw_text(at_pointer(j, pointer, field));
  const auto it = values.find(raw);
  return it == values.end() ? raw : it->second;
}

template <typename E>
E mapped_enum(const Json& j, const std::string& pointer, const char* field,
              const std::map<std::string, std::string>& values, std::optional<E> (*parse)(std::string_view)) {
  const auto s = mapped(j, pointer, field, values);
  const auto e = parse(s);
  if (!e) throw data_error(fmt::format("unrecognized {} '{}'", field, s));
  return *e;
}

int as_int(const Json& j, const char* field) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_string()) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(j.get<std::string>(), &used);
      if (used == j.get<std::string>().size()) return v;
    } catch (const std::exception&) {
    }
  }
  throw data_error(fmt::format("{} is not an integer", field));
}

std::string substitute(std::string s, const std::string& key, const std::string& value) {
  for (std::size_t pos; (pos = s.find(key)) != std::string::npos;) s.replace(pos, key.size(), value);
  return s;
}

}  // namespace

MatchRecord map_record(const Json& raw, const FieldMapping& m) {
  try {
    MatchRecord r;
    r.match_id = raw_text(at_pointer(raw, m.match_id, "match_id"));
    r.region = mapped_enum(raw, m.region, "region", m.region_values, parse_region);
    r.tier = mapped_enum(raw, m.tier, "tier", m.tier_values, parse_tier);
    r.division = as_int(at_pointer(raw, m.division, "division"), "division");
    const auto& teams = at_pointer(raw, m.teams, "teams");
    if (!teams.is_array() || teams.size() != 2) throw data_error("teams must be an array of two");
    for (std::size_t t = 0; t < 2; ++t) {
      const auto& team = teams[t];
      auto& out = r.teams[t];
      out.side = mapped_enum(team, m.side, "side", m.side_values, parse_side);
      out.outcome = mapped_enum(team, m.outcome, "outcome", m.outcome_values, parse_outcome);
      const auto& slots = at_pointer(team, m.slots, "slots");
      if (!slots.is_array() || slots.size() != kTeamSize) throw data_error("a team needs five slots");
      for (std::size_t s = 0; s < kTeamSize; ++s) {
        out.slots[s].player = raw_text(at_pointer(slots[s], m.player, "player"));
        out.slots[s].champion = raw_text(at_pointer(slots[s], m.champion, "champion"));
        out.slots[s].pick_index = as_int(at_pointer(slots[s], m.pick_index, "pick_index"), "pick_index");
      }
    }
    validate(r);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw data_error(e.what());
  }
}

void ProviderConfig::validate() const {
  if (mode == Mode::Fixture) {
    if (fixture_path.empty()) throw invalid_argument("fixture provider needs fixture_path");
    return;
  }
  if (base_url.empty()) throw invalid_argument("remote provider needs base_url");
  if (token_env.empty()) throw invalid_argument("remote provider needs token_env (an environment variable name)");
  if (page_size < 1) throw invalid_argument("page_size must be positive");
  if (!(rate_limit > 0)) throw invalid_argument("rate_limit must be positive");
  if (retry.max_attempts < 1) throw invalid_argument("retry.max_attempts must be at least 1");
  if (!(retry.multiplier >= 1.0)) throw invalid_argument("retry.multiplier must be at least 1");
}

void from_json(const Json& j, ProviderConfig& v) {
  if (j.contains("auth_token") || j.contains("token"))
    throw invalid_argument("tokens must come from the environment; set token_env instead");
  const auto mode = j.value("mode", std::string("Fixture"));
  if (mode == "Fixture")
    v.mode = ProviderConfig::Mode::Fixture;
  else if (mode == "Remote")
    v.mode = ProviderConfig::Mode::Remote;
  else
    throw data_error("unknown provider mode '" + mode + "'");
  v.fixture_path = j.value("fixture_path", v.fixture_path);
  v.base_url = j.value("base_url", v.base_url);
  v.token_env = j.value("token_env", v.token_env);
  v.token_header = j.value("token_header", v.token_header);
  v.history_path = j.value("history_path", v.history_path);
  v.page_size = j.value("page_size", v.page_size);
  v.rate_limit = j.value("rate_limit", v.rate_limit);
  v.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long>(v.timeout.count())));
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    v.retry.max_attempts = r.value("max_attempts", v.retry.max_attempts);
    v.retry.initial_backoff = std::chrono::milliseconds(r.value("backoff_ms", static_cast<long>(v.retry.initial_backoff.count())));
    v.retry.multiplier = r.value("multiplier", v.retry.multiplier);
  }
  if (j.contains("mapping")) {
    const auto& m = j.at("mapping");
    auto& f = v.mapping;
    for (const auto& [key, field] : std::initializer_list<std::pair<const char*, std::string*>>{
             {"records", &f.records}, {"match_id", &f.match_id}, {"region", &f.region}, {"tier", &f.tier},
             {"division", &f.division}, {"teams", &f.teams}, {"side", &f.side}, {"outcome", &f.outcome},
             {"slots", &f.slots}, {"player", &f.player}, {"champion", &f.champion}, {"pick_index", &f.pick_index}})
      if (m.contains(key)) *field = m.at(key).get<std::string>();
    if (m.contains("region_values")) f.region_values = m.at("region_values").get<std::map<std::string, std::string>>();
    if (m.contains("tier_values")) f.tier_values = m.at("tier_values").get<std::map<std::string, std::string>>();
    if (m.contains("side_values")) f.side_values = m.at("side_values").get<std::map<std::string, std::string>>();
    if (m.contains("outcome_values")) f.outcome_values = m.at("outcome_values").get<std::map<std::string, std::string>>();
  }
}

FixtureProvider::FixtureProvider(const std::string& path, FieldMapping mapping) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open fixture " + path);
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records_.push_back(map_record(Json::parse(line), mapping));
    } catch (const std::exception& e) {
      ++skipped_;
      spdlog::warn("{} line {}: skipped malformed record: {}", path, n, e.what());
    }
  }
}

FetchResult FixtureProvider::fetch_match_history(const PlayerId& player, std::size_t limit) {
  if (limit < 1) throw invalid_argument("limit must be at least 1");
  FetchResult r;
  for (const auto& m : records_) {
    if (m.team_of(player) < 0) continue;
    if (r.matches.size() == limit) break;
    r.matches.push_back(m);
  }
  r.truncated = r.matches.size() < limit;
  return r;
}

RateLimiter::RateLimiter(double rate)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / rate))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(next_, now);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

struct RemoteProvider::Impl {
  explicit Impl(const std::string& base_url) : client(base_url) {}
  httplib::Client client;
};

RemoteProvider::RemoteProvider(ProviderConfig config)
    : config_(std::move(config)), limiter_(config_.rate_limit > 0 ? config_.rate_limit : 1.0) {
  config_.validate();
  const char* token = std::getenv(config_.token_env.c_str());
  if (!token || !*token) throw Error(Error::Kind::Auth, "environment variable " + config_.token_env + " is not set");
  token_ = token;
  impl_ = std::make_unique<Impl>(config_.base_url);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  impl_->client.set_connection_timeout(secs.count(), usecs.count());
  impl_->client.set_read_timeout(secs.count(), usecs.count());
}

RemoteProvider::~RemoteProvider() = default;

FetchResult RemoteProvider::fetch_match_history(const PlayerId& player, std::size_t limit) {
  if (limit < 1) throw invalid_argument("limit must be at least 1");
  FetchResult result;
  std::size_t start = 0;
  const httplib::Headers headers{{config_.token_header, token_}};
  while (result.matches.size() < limit) {
    const std::size_t count = std::min<std::size_t>(static_cast<std::size_t>(config_.page_size), limit - result.matches.size());
    std::string path = substitute(config_.history_path, "{player}", httplib::detail::encode_url(player));
    path = substitute(path, "{start}", std::to_string(start));
    path = substitute(path, "{count}", std::to_string(count));

    std::optional<std::string> body;
    std::string failure;
    auto backoff = config_.retry.initial_backoff;
    for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
      limiter_.acquire();
      ++requests_;
      const auto res = impl_->client.Get(path, headers);
      if (res && res->status == 200) {
        body = res->body;
        break;
      }
      if (res && (res->status == 401 || res->status == 403))
        throw Error(Error::Kind::Auth, fmt::format("provider rejected credentials (HTTP {})", res->status));
      const bool throttled = res && res->status == 429;
      const bool transient = !res || res->status >= 500 || throttled;
      failure = res ? fmt::format("HTTP {}", res->status) : fmt::format("transport error: {}", httplib::to_string(res.error()));
      if (!transient) break;
      if (attempt == config_.retry.max_attempts) {
        if (throttled) throw Error(Error::Kind::Provider, "rate limit exhausted after " + std::to_string(attempt) + " attempts");
        break;
      }
      auto wait = backoff;
      if (throttled && res->has_header("Retry-After")) {
        try {
          wait = std::max(wait, std::chrono::milliseconds(1000 * std::stol(res->get_header_value("Retry-After"))));
        } catch (const std::exception&) {
        }
      }
      spdlog::debug("{}: {} on attempt {}, retrying in {} ms", path, failure, attempt, wait.count());
      std::this_thread::sleep_for(wait);
      backoff = std::chrono::milliseconds(static_cast<long>(static_cast<double>(backoff.count()) * config_.retry.multiplier));
    }
    if (!body) {
      result.truncated = true;
      result.notes.push_back(fmt::format("{}: giving up after {}", path, failure));
      spdlog::warn("{}: giving up after {}; returning {} records", path, failure, result.matches.size());
      return result;
    }

    Json page;
    try {
      page = Json::parse(*body);
    } catch (const nlohmann::json::exception& e) {
      result.truncated = true;
      result.notes.push_back(path + ": unparseable page");
      spdlog::warn("{}: unparseable page: {}", path, e.what());
      return result;
    }
    const Json* records = &page;
    if (!config_.mapping.records.empty()) {
      try {
        records = &page.at(Json::json_pointer(config_.mapping.records));
      } catch (const nlohmann::json::exception&) {
        records = nullptr;
      }
    }
    if (!records || !records->is_array()) {
      result.truncated = true;
      result.notes.push_back(path + ": page has no record array");
      return result;
    }
    for (const auto& raw : *records) {
      if (result.matches.size() == limit) break;
      try {
        result.matches.push_back(map_record(raw, config_.mapping));
      } catch (const Error& e) {
        ++result.skipped;
        spdlog::warn("{}: skipped malformed record: {}", path, e.what());
      }
    }
    start += records->size();
    if (records->size() < count) break;  // source exhausted
  }
  result.truncated = result.truncated || result.matches.size() < limit;
  return result;
}

std::unique_ptr<MatchProvider> make_provider(const ProviderConfig& config) {
  config.validate();
  if (config.mode == ProviderConfig::Mode::Fixture) return std::make_unique<FixtureProvider>(config.fixture_path, config.mapping);
  return std::make_unique<RemoteProvider>(config);
}

SnowballResult snowball_sample(MatchProvider& provider, const std::vector<PlayerId>& seeds, int depth,
                               std::size_t limit) {
  if (seeds.empty()) throw invalid_argument("snowball sampling needs at least one seed");
  if (depth < 0) throw invalid_argument("depth must be non-negative");
  SnowballResult out;
  std::set<std::string> seen_matches;
  std::map<PlayerId, std::pair<Tier, int>> seed_rank;
  std::deque<PlayerId> queue;
  for (const auto& s : seeds)
    if (out.depth.emplace(s, 0).second) {
      out.seed_of[s] = s;
      queue.push_back(s);
    }

  while (!queue.empty()) {
    const PlayerId player = queue.front();
    queue.pop_front();
    const int d = out.depth.at(player);
    FetchResult fetched;
    try {
      fetched = provider.fetch_match_history(player, limit);
    } catch (const Error& e) {
      if (e.kind() == Error::Kind::Auth) throw;
      out.errors[player] = e.what();
      spdlog::warn("snowball: {} failed: {}", player, e.what());
      continue;
    }
    out.truncated_players += fetched.truncated;
    out.skipped_records += fetched.skipped;
    const PlayerId& seed = out.seed_of.at(player);
    if (player == seed && !fetched.matches.empty())
      seed_rank.emplace(seed, std::pair{fetched.matches.front().tier, fetched.matches.front().division});

    for (auto& m : fetched.matches) {
      if (player != seed) {
        const auto it = seed_rank.find(seed);
        if (it != seed_rank.end()) {
          m.tier = it->second.first;
          m.division = it->second.second;
        }
      }
      if (d < depth)
        for (const auto& team : m.teams)
          for (const auto& slot : team.slots)
            if (out.depth.emplace(slot.player, d + 1).second) {
              out.seed_of[slot.player] = seed;
              queue.push_back(slot.player);
            }
      if (seen_matches.insert(m.match_id).second) out.matches.push_back(std::move(m));
    }
  }
  return out;
}

HistoryIndex snowball_histories(const SnowballResult& result) {
  HistoryIndex idx = build_histories(result.matches);
  std::map<PlayerId, std::pair<Tier, int>> seed_rank;
  for (const auto& m : result.matches)
    for (const auto& team : m.teams)
      for (const auto& slot : team.slots) {
        const auto it = result.seed_of.find(slot.player);
        if (it != result.seed_of.end() && it->second == slot.player) seed_rank.emplace(slot.player, std::pair{m.tier, m.division});
      }
  for (auto& [id, h] : idx) {
    const auto s = result.seed_of.find(id);
    if (s == result.seed_of.end()) continue;
    const auto r = seed_rank.find(s->second);
    if (r == seed_rank.end()) continue;
    h.tier = r->second.first;
    h.division = r->second.second;
  }
  return idx;
}

}  // namespace teamdesign
