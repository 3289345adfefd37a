#include "teamdesign/store.hpp"

#include <fmt/format.h>

#include <sstream>

namespace teamdesign {

namespace fs = std::filesystem;

CorpusStore::CorpusStore(fs::path root) : root_(std::move(root)) {
  const auto path = root_ / kManifest;
  if (!fs::exists(path)) return;
  const Json doc = io::read_json_file(path.string());
  try {
    const int version = doc.at("version").get<int>();
    if (version != io::kFormatVersion)
      throw data_error(fmt::format("{}: unsupported manifest version {}", path.string(), version));
    manifest_.version = version;
    if (doc.contains("seed") && !doc.at("seed").is_null()) manifest_.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("generator")) manifest_.generator = doc.at("generator");
    for (const auto& [name, e] : doc.at("files").items())
      manifest_.files[name] = {e.at("sha256").get<std::string>(), e.at("version").get<int>(),
                               e.at("bytes").get<std::uintmax_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw data_error(path.string() + ": " + e.what());
  }
}

void CorpusStore::write_manifest() const {
  Json files = Json::object();
  for (const auto& [name, e] : manifest_.files)
    files[name] = Json{{"sha256", e.sha256}, {"version", e.version}, {"bytes", e.bytes}};
  Json doc{{"version", manifest_.version},
           {"seed", manifest_.seed ? Json(*manifest_.seed) : Json(nullptr)},
           {"files", files}};
  if (!manifest_.generator.is_null()) doc["generator"] = manifest_.generator;
  fs::create_directories(root_);
  io::write_json_file((root_ / kManifest).string(), doc);
}

void CorpusStore::set_seed(std::uint64_t seed) {
  manifest_.seed = seed;
  write_manifest();
}

void CorpusStore::set_generator(const GeneratorConfig& config) {
  manifest_.generator = config;
  manifest_.seed = config.seed;
  write_manifest();
}

void CorpusStore::save_file(const std::string& relative, const std::string& bytes) {
  const fs::path rel = fs::path(relative).lexically_normal();
  if (rel.empty() || rel.is_absolute() || *rel.begin() == "..")
    throw invalid_argument(fmt::format("{} is not a path inside the store", relative));
  const auto path = root_ / rel;
  fs::create_directories(path.parent_path());
  io::write_file(path.string(), bytes);
  manifest_.files[relative] = {io::sha256_hex(bytes), io::kFormatVersion, bytes.size()};
  write_manifest();
}

std::string CorpusStore::checked_path(const std::string& relative) const {
  const auto it = manifest_.files.find(relative);
  if (it == manifest_.files.end()) throw data_error(fmt::format("{}: {} is not in the manifest", root_.string(), relative));
  if (it->second.version != io::kFormatVersion)
    throw data_error(fmt::format("{}: unsupported format version {}", relative, it->second.version));
  return (root_ / relative).string();
}

std::string CorpusStore::load_file(const std::string& relative) const {
  const auto path = checked_path(relative);
  std::string bytes = io::read_file(path);
  if (io::sha256_hex(bytes) != manifest_.files.at(relative).sha256)
    throw data_error(fmt::format("{}: contents do not match the manifest hash", path));
  return bytes;
}

void CorpusStore::verify() const {
  for (const auto& [name, e] : manifest_.files) (void)load_file(name);
}

void CorpusStore::save_catalog(const ChampionCatalog& catalog) {
  std::ostringstream out;
  io::write_catalog_csv(out, catalog);
  save_file(kCatalog, out.str());
}

ChampionCatalog CorpusStore::load_catalog() const {
  std::istringstream in(load_file(kCatalog));
  return io::read_catalog_csv(in);
}

void CorpusStore::save_matches(const std::vector<MatchRecord>& matches) {
  std::ostringstream out;
  io::write_jsonl(out, matches);
  save_file(kMatches, out.str());
}

std::vector<MatchRecord> CorpusStore::load_matches() const {
  std::istringstream in(load_file(kMatches));
  return io::read_jsonl<MatchRecord>(in, kMatches);
}

void CorpusStore::save_histories(const HistoryIndex& histories) {
  save_file(kHistories, io::histories_jsonl(histories));
}

HistoryIndex CorpusStore::load_histories() const {
  std::istringstream in(load_file(kHistories));
  HistoryIndex idx;
  for (auto& h : io::read_jsonl<PlayerHistory>(in, kHistories)) {
    const auto id = h.player_id;
    if (!idx.emplace(id, std::move(h)).second) throw data_error(std::string(kHistories) + ": duplicate history for " + id);
  }
  return idx;
}

namespace {

template <typename T>
T load_enveloped(const std::string& bytes, const std::string& what, const std::string& format) {
  const Json doc = io::parse_json(bytes, what);
  try {
    return io::open_envelope(doc, format).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw data_error(what + ": " + e.what());
  }
}

}  // namespace

void CorpusStore::save_space(const SimilaritySpace& space) {
  save_file(kSpace, io::envelope("similarity_space", space).dump() + "\n");
}

SimilaritySpace CorpusStore::load_space() const {
  return load_enveloped<SimilaritySpace>(load_file(kSpace), kSpace, "similarity_space");
}

void CorpusStore::save_models(const std::vector<WinModel>& models) {
  save_file(kModels, io::envelope("win_models", models).dump(2) + "\n");
}

std::vector<WinModel> CorpusStore::load_models() const {
  return load_enveloped<std::vector<WinModel>>(load_file(kModels), kModels, "win_models");
}

void CorpusStore::save_truth(const GroundTruth& truth) {
  save_file(kTruth, io::envelope("ground_truth", truth).dump() + "\n");
}

GroundTruth CorpusStore::load_truth() const {
  return load_enveloped<GroundTruth>(load_file(kTruth), kTruth, "ground_truth");
}

}  // namespace teamdesign
