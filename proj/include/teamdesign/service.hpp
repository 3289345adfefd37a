#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "teamdesign/champion_space.hpp"
#include "teamdesign/draft.hpp"
#include "teamdesign/roster.hpp"
#include "teamdesign/win_model.hpp"

namespace teamdesign {

struct ServiceOptions {
  std::size_t default_top_n = 5;
  std::size_t max_top_n = 200;
  std::size_t max_sessions = 10000;
  FeatureOptions features;
};

/// Model used for a session: the exact (region, tier) cell, else a pooled
/// model, else the first one.
const WinModel& select_model(const std::vector<WinModel>& models, Region region, Tier tier);

/// HTTP session service over the draft engine. Endpoints:
///   GET  /health
///   GET  /projection
///   POST /sessions                         -> 201 {session_id, seq, state}
///   GET  /sessions/{id}                    -> {session_id, seq, region, tier, state}
///   POST /sessions/{id}/actions {seq, action}
///   GET  /sessions/{id}/recommendations?top_n=N
///   GET  /sessions/{id}/trades?team=A|B
///   GET  /sessions/{id}/log                -> {session_id, initial_state, entries}
/// Errors: 400 malformed body, 404 unknown session, 409 stale seq,
/// 422 illegal action or wrong phase. Error bodies are {error, message}.
class DraftService {
 public:
  DraftService(SimilaritySpace space, std::vector<WinModel> models, HistoryIndex histories, ServiceOptions options = {});
  ~DraftService();
  DraftService(const DraftService&) = delete;
  DraftService& operator=(const DraftService&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  void run(const std::string& host, int port);
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace teamdesign
