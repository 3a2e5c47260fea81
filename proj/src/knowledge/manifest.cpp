#include "econlab/knowledge/manifest.hpp"

#include "econlab/error.hpp"
#include "econlab/util.hpp"

namespace econlab::knowledge {

using nlohmann::json;

json to_json(const RetrievalManifest& m) {
  json hits = json::array();
  for (const auto& h : m.hits) hits.push_back({{"doc_id", h.doc_id}, {"seq", h.seq}, {"score", h.score}});
  return {{"manifest_id", m.manifest_id}, {"session_id", m.session_id}, {"query", m.query},
          {"filters", to_json(m.filters)},  {"k", m.k},                   {"timestamp", m.timestamp},
          {"hits", hits},                   {"short", m.short_result}};
}

RetrievalManifest manifest_from_json(const json& j) {
  RetrievalManifest m;
  m.manifest_id = j.at("manifest_id").get<std::string>();
  m.session_id = j.at("session_id").get<std::string>();
  m.query = j.at("query").get<std::string>();
  m.filters = filters_from_json(j.value("filters", json::object()));
  m.k = j.value("k", std::size_t{0});
  m.timestamp = j.value("timestamp", "");
  for (const auto& h : j.at("hits")) {
    m.hits.push_back({h.at("doc_id").get<std::string>(), h.at("seq").get<std::uint32_t>(), h.at("score").get<double>()});
  }
  m.short_result = j.value("short", false);
  return m;
}

ManifestStore::ManifestStore(std::filesystem::path data_dir) : data_dir_(std::move(data_dir)) {}

std::filesystem::path ManifestStore::file(const std::string& session_id) const {
  if (!util::is_safe_id(session_id)) throw ValidationError("invalid session id: " + session_id, {"session_id"});
  return data_dir_ / "sessions" / session_id / "manifests.jsonl";
}

std::mutex& ManifestStore::session_mutex(const std::string& session_id) const {
  std::lock_guard lock(map_mutex_);
  auto& slot = session_mutexes_[session_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

RetrievalManifest ManifestStore::append(RetrievalManifest manifest) {
  const auto path = file(manifest.session_id);
  std::lock_guard lock(session_mutex(manifest.session_id));
  manifest.manifest_id = "m" + std::to_string(util::read_lines(path).size() + 1);
  if (manifest.timestamp.empty()) manifest.timestamp = util::now_iso8601();
  util::append_line(path, to_json(manifest).dump());
  return manifest;
}

std::vector<RetrievalManifest> ManifestStore::list(const std::string& session_id) const {
  const auto path = file(session_id);
  std::lock_guard lock(session_mutex(session_id));
  std::vector<RetrievalManifest> out;
  for (const auto& line : util::read_lines(path)) out.push_back(manifest_from_json(json::parse(line)));
  return out;
}

std::optional<RetrievalManifest> ManifestStore::find(const std::string& session_id, const std::string& manifest_id) const {
  for (auto& m : list(session_id))
    if (m.manifest_id == manifest_id) return std::move(m);
  return std::nullopt;
}

Retrieval retrieve(const Index& index, ManifestStore& store, const std::string& session_id, const std::string& query,
                   std::size_t k, const SearchFilters& filters) {
  auto found = index.search(query, k, filters);
  RetrievalManifest m;
  m.session_id = session_id;
  m.query = query;
  m.filters = filters;
  m.k = k;
  m.hits = found.hits;
  m.short_result = found.short_result;

  Retrieval out;
  out.manifest = store.append(std::move(m));
  for (const auto& h : out.manifest.hits) {
    RetrievedChunk rc;
    rc.hit = h;
    if (auto d = index.document(h.doc_id)) {
      rc.title = d->title;
      rc.venue = d->venue;
      rc.year = d->year;
    }
    if (auto c = index.chunk(h.doc_id, h.seq)) rc.text = c->text;
    out.chunks.push_back(std::move(rc));
  }
  return out;
}

}  // namespace econlab::knowledge
