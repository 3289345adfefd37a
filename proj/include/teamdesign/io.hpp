#pragma once

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

#include "teamdesign/analytics.hpp"
#include "teamdesign/champion_space.hpp"
#include "teamdesign/draft.hpp"
#include "teamdesign/match.hpp"
#include "teamdesign/roster.hpp"
#include "teamdesign/synthgen.hpp"
#include "teamdesign/win_model.hpp"

namespace teamdesign {

using Json = nlohmann::ordered_json;

// JSON mappings, found by nlohmann through ADL. Loaders throw Error(Data) on
// missing fields, bad enum names or inconsistent shapes.
void to_json(Json& j, const TeamSlot& v);
void from_json(const Json& j, TeamSlot& v);
void to_json(Json& j, const TeamRecord& v);
void from_json(const Json& j, TeamRecord& v);
void to_json(Json& j, const MatchRecord& v);
void from_json(const Json& j, MatchRecord& v);
void to_json(Json& j, const PlayerHistory& v);
void from_json(const Json& j, PlayerHistory& v);
void to_json(Json& j, const SpaceParams& v);
void from_json(const Json& j, SpaceParams& v);
void to_json(Json& j, const SimilaritySpace& v);
void from_json(const Json& j, SimilaritySpace& v);
void to_json(Json& j, const TeamFeatureVector& v);
void from_json(const Json& j, TeamFeatureVector& v);
void to_json(Json& j, const WinModel& v);
void from_json(const Json& j, WinModel& v);
void to_json(Json& j, const TrainOptions& v);
void from_json(const Json& j, TrainOptions& v);
void to_json(Json& j, const GeneratorConfig& v);
void from_json(const Json& j, GeneratorConfig& v);
void to_json(Json& j, const MatchTruth& v);
void from_json(const Json& j, MatchTruth& v);
void to_json(Json& j, const GroundTruth& v);
void from_json(const Json& j, GroundTruth& v);
void to_json(Json& j, const DraftConfig& v);
void from_json(const Json& j, DraftConfig& v);
void to_json(Json& j, const DraftAction& v);
void from_json(const Json& j, DraftAction& v);
void to_json(Json& j, const DraftState& v);
void from_json(const Json& j, DraftState& v);
void to_json(Json& j, const Candidate& v);
void from_json(const Json& j, Candidate& v);
void to_json(Json& j, const Recommendation& v);
void from_json(const Json& j, Recommendation& v);
void to_json(Json& j, const TradePlan& v);
void from_json(const Json& j, TradePlan& v);
void to_json(Json& j, const AblationResult& v);

namespace io {

/// Format versions written into the corpus manifest and standalone files.
inline constexpr int kFormatVersion = 1;

/// Wraps a payload as {"format": name, "version": kFormatVersion, "data": payload}.
Json envelope(const std::string& format, Json payload);
/// Checks the format name and version and returns the payload.
Json open_envelope(const Json& doc, const std::string& format);

Json parse_json(const std::string& text, const std::string& what);
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Catalog CSV: header "champion_id,<feature>..." then one row per champion.
ChampionCatalog read_catalog_csv(std::istream& in);
void write_catalog_csv(std::ostream& out, const ChampionCatalog& catalog);

/// One JSON object per line. Strict readers throw Error(Data) naming the line.
template <typename T>
void write_jsonl(std::ostream& out, const std::vector<T>& items) {
  for (const auto& item : items) out << Json(item).dump() << '\n';
}

template <typename T>
std::vector<T> read_jsonl(std::istream& in, const std::string& what) {
  std::vector<T> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line).get<T>());
    } catch (const nlohmann::json::exception& e) {
      throw data_error(what + " line " + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw data_error(what + " line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<MatchRecord> read_matches(const std::string& path);
void write_matches(const std::string& path, const std::vector<MatchRecord>& matches);
HistoryIndex read_histories(const std::string& path);
void write_histories(const std::string& path, const HistoryIndex& histories);
/// JSONL text of the histories, sorted by player id so output is reproducible.
std::string histories_jsonl(const HistoryIndex& histories);

/// Team feature rows as a delimited table.
Table to_table(const FeatureTable& table);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace io
}  // namespace teamdesign
