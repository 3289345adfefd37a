#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "teamdesign/io.hpp"

namespace teamdesign {

struct ManifestEntry {
  std::string sha256;
  int version = io::kFormatVersion;
  std::uintmax_t bytes = 0;

  bool operator==(const ManifestEntry&) const = default;
};

struct Manifest {
  int version = io::kFormatVersion;
  std::optional<std::uint64_t> seed;
  std::map<std::string, ManifestEntry> files;  // relative path -> entry
  Json generator;                              // config used to generate the corpus, if any
};

/// File-backed corpus: catalog, matches, histories, artifacts and a manifest
/// holding a SHA-256 per file. Every load checks the manifest entry.
class CorpusStore {
 public:
  static constexpr const char* kManifest = "manifest.json";
  static constexpr const char* kCatalog = "catalog.csv";
  static constexpr const char* kMatches = "matches.jsonl";
  static constexpr const char* kHistories = "histories.jsonl";
  static constexpr const char* kSpace = "artifacts/space.json";
  static constexpr const char* kModels = "artifacts/models.json";
  static constexpr const char* kTruth = "truth.json";

  /// Opens (or prepares) a store rooted at `root`; an existing manifest is read.
  explicit CorpusStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  const Manifest& manifest() const { return manifest_; }
  bool has(const std::string& relative) const { return manifest_.files.count(relative) != 0; }

  void set_seed(std::uint64_t seed);
  void set_generator(const GeneratorConfig& config);

  void save_catalog(const ChampionCatalog& catalog);
  ChampionCatalog load_catalog() const;
  void save_matches(const std::vector<MatchRecord>& matches);
  std::vector<MatchRecord> load_matches() const;
  void save_histories(const HistoryIndex& histories);
  HistoryIndex load_histories() const;
  void save_space(const SimilaritySpace& space);
  SimilaritySpace load_space() const;
  void save_models(const std::vector<WinModel>& models);
  std::vector<WinModel> load_models() const;
  void save_truth(const GroundTruth& truth);
  GroundTruth load_truth() const;

  /// Writes an arbitrary file under the root and records it in the manifest.
  void save_file(const std::string& relative, const std::string& bytes);
  /// Reads a file after checking its manifest hash.
  std::string load_file(const std::string& relative) const;

  /// Re-hashes every file in the manifest; throws Error(Data) on the first mismatch.
  void verify() const;

 private:
  void write_manifest() const;
  std::string checked_path(const std::string& relative) const;

  std::filesystem::path root_;
  Manifest manifest_;
};

}  // namespace teamdesign
