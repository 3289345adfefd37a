#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "teamdesign/io.hpp"

namespace teamdesign {

/// Where each MatchRecord field lives in a provider's raw record, as JSON
/// pointers. Team and slot pointers are relative to a team or slot object.
/// The value maps translate raw values (numbers and booleans compared by
/// their JSON text) into canonical enum names.
struct FieldMapping {
  std::string records;  // array of records inside a page; "" means the page is the array
  std::string match_id = "/match_id";
  std::string region = "/region";
  std::string tier = "/tier";
  std::string division = "/division";
  std::string teams = "/teams";
  std::string side = "/side";
  std::string outcome = "/outcome";
  std::string slots = "/slots";
  std::string player = "/player";
  std::string champion = "/champion";
  std::string pick_index = "/pick_index";
  std::map<std::string, std::string> region_values;
  std::map<std::string, std::string> tier_values;
  std::map<std::string, std::string> side_values;
  std::map<std::string, std::string> outcome_values;
};

/// Maps one raw record; throws Error(Data) when it does not fit.
MatchRecord map_record(const Json& raw, const FieldMapping& mapping);

struct RetryPolicy {
  int max_attempts = 4;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
};

struct ProviderConfig {
  enum class Mode { Fixture, Remote };
  Mode mode = Mode::Fixture;
  std::string fixture_path;  // Fixture: JSONL of raw records
  std::string base_url;      // Remote: scheme://host[:port]
  /// Remote: environment variable holding the API token. The token itself is
  /// never stored in configuration.
  std::string token_env;
  std::string token_header = "X-Api-Token";
  /// Remote: request path; {player}, {start} and {count} are substituted.
  std::string history_path = "/players/{player}/matches?start={start}&count={count}";
  int page_size = 20;
  double rate_limit = 10.0;  // requests per second
  RetryPolicy retry;
  std::chrono::milliseconds timeout{5000};
  FieldMapping mapping;

  /// Throws Error(InvalidArgument) on an unusable configuration.
  void validate() const;
};

void from_json(const Json& j, ProviderConfig& v);

struct FetchResult {
  std::vector<MatchRecord> matches;
  bool truncated = false;  // fewer than `limit` records could be delivered
  std::size_t skipped = 0;  // malformed records dropped
  std::vector<std::string> notes;
};

class MatchProvider {
 public:
  virtual ~MatchProvider() = default;
  /// Most recent first, at most `limit` records.
  virtual FetchResult fetch_match_history(const PlayerId& player, std::size_t limit = 60) = 0;
};

/// Reads every raw record from a local JSONL file once; a player's history is
/// the records they appear in, in file order.
class FixtureProvider : public MatchProvider {
 public:
  FixtureProvider(const std::string& path, FieldMapping mapping = {});
  FetchResult fetch_match_history(const PlayerId& player, std::size_t limit = 60) override;

 private:
  std::vector<MatchRecord> records_;
  std::size_t skipped_ = 0;
};

/// Token bucket allowing `rate` requests per second with a burst of one.
class RateLimiter {
 public:
  explicit RateLimiter(double rate);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

class RemoteProvider : public MatchProvider {
 public:
  explicit RemoteProvider(ProviderConfig config);
  ~RemoteProvider() override;
  FetchResult fetch_match_history(const PlayerId& player, std::size_t limit = 60) override;

  std::size_t requests_sent() const { return requests_; }

 private:
  struct Impl;
  ProviderConfig config_;
  std::string token_;
  RateLimiter limiter_;
  std::size_t requests_ = 0;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<MatchProvider> make_provider(const ProviderConfig& config);

struct SnowballResult {
  std::vector<MatchRecord> matches;       // deduplicated by match_id, in discovery order
  std::map<PlayerId, int> depth;          // hop count from the nearest seed
  std::map<PlayerId, PlayerId> seed_of;   // seed each player was reached from
  std::map<PlayerId, std::string> errors; // per-player provider failures
  std::size_t truncated_players = 0;
  std::size_t skipped_records = 0;
};

/// Breadth-first expansion over co-participants. Matches found through a
/// player inherit the tier and division of that player's seed.
SnowballResult snowball_sample(MatchProvider& provider, const std::vector<PlayerId>& seeds, int depth,
                               std::size_t limit = 60);

/// Histories over the sampled matches, tier and division taken from the seed.
HistoryIndex snowball_histories(const SnowballResult& result);

}  // namespace teamdesign
