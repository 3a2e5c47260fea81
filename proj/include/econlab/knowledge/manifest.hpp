#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/knowledge/index.hpp"

namespace econlab::knowledge {

struct RetrievalManifest {
  std::string manifest_id;
  std::string session_id;
  std::string query;
  SearchFilters filters;
  std::size_t k = 0;
  std::string timestamp;
  std::vector<Hit> hits;
  bool short_result = false;
};

nlohmann::json to_json(const RetrievalManifest& m);
RetrievalManifest manifest_from_json(const nlohmann::json& j);

/// Append-only manifests at <data_dir>/sessions/<session_id>/manifests.jsonl.
class ManifestStore {
 public:
  explicit ManifestStore(std::filesystem::path data_dir);

  /// Assigns the next manifest id ("m1", "m2", ... per session) and persists the line.
  RetrievalManifest append(RetrievalManifest manifest);

  std::vector<RetrievalManifest> list(const std::string& session_id) const;
  std::optional<RetrievalManifest> find(const std::string& session_id, const std::string& manifest_id) const;

 private:
  std::filesystem::path file(const std::string& session_id) const;
  std::mutex& session_mutex(const std::string& session_id) const;

  std::filesystem::path data_dir_;
  mutable std::mutex map_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::mutex>> session_mutexes_;
};

struct RetrievedChunk {
  Hit hit;
  std::string title;
  std::string venue;
  int year = 0;
  std::string text;
};

struct Retrieval {
  RetrievalManifest manifest;
  std::vector<RetrievedChunk> chunks;
};

/// Index search that always leaves a manifest behind. The manifest is on disk before the
/// chunks are handed back. Throws StateError on an empty index, ValidationError for k < 1.
Retrieval retrieve(const Index& index, ManifestStore& store, const std::string& session_id, const std::string& query,
                   std::size_t k, const SearchFilters& filters = {});

}  // namespace econlab::knowledge
