#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/knowledge/embedding.hpp"

namespace econlab::knowledge {

struct Document {
  std::string doc_id;
  std::string title;
  std::string venue;
  int year = 0;
  std::string abstract_text;
  std::string introduction;
};

nlohmann::json to_json(const Document& doc);

/// Parses one corpus object. Throws ValidationError naming missing or mistyped fields.
Document document_from_json(const nlohmann::json& j);

/// Reads a JSON-lines corpus. Errors carry the 1-based line number.
std::vector<Document> load_corpus(const std::filesystem::path& path);

inline constexpr std::size_t kDefaultWindow = 1000;
inline constexpr std::size_t kDefaultOverlap = 200;

/// Splits `text` into windows of `window` code points (UTF-8 aware) that overlap by
/// `overlap`. Windows start every window-overlap code points; the last one ends at the
/// text end. Empty text gives no chunks. Throws std::invalid_argument if window <= overlap.
std::vector<std::string> chunk_text(std::string_view text, std::size_t window = kDefaultWindow,
                                    std::size_t overlap = kDefaultOverlap);

struct Chunk {
  std::string doc_id;
  std::uint32_t seq = 0;
  std::string text;
};

struct SearchFilters {
  std::optional<int> year_min;
  std::optional<int> year_max;
  std::set<std::string> venues;  // empty = any venue

  bool admits(const Document& doc) const noexcept;
  bool empty() const noexcept { return !year_min && !year_max && venues.empty(); }
};

nlohmann::json to_json(const SearchFilters& f);
SearchFilters filters_from_json(const nlohmann::json& j);

struct Hit {
  std::string doc_id;
  std::uint32_t seq = 0;
  double score = 0.0;
};

/// Hit order used everywhere: score desc, then doc_id asc, then seq asc.
bool hit_before(const Hit& a, const Hit& b) noexcept;

struct IngestReport {
  std::size_t documents = 0;
  std::size_t chunks = 0;
  std::size_t embedding_calls = 0;
};

struct SearchResult {
  std::vector<Hit> hits;
  bool short_result = false;  // fewer than k chunks passed the filters
};

/// Exact full-scan chunk index. Search takes a shared lock; ingest an exclusive one.
class Index {
 public:
  explicit Index(std::shared_ptr<const Embedder> embedder, std::size_t window = kDefaultWindow,
                 std::size_t overlap = kDefaultOverlap);

  /// Chunks abstract then introduction (seq runs across both). All-or-nothing: throws
  /// ValidationError on duplicate doc_id, empty abstract or bad embedding dimension.
  IngestReport ingest(const std::vector<Document>& docs);

  SearchResult search(std::string_view query, std::size_t k, const SearchFilters& filters = {}) const;
  SearchResult search_vector(std::span<const float> query, std::size_t k, const SearchFilters& filters = {}) const;

  std::size_t dimension() const noexcept { return dim_; }
  std::size_t size() const;
  std::size_t document_count() const;
  const Embedder& embedder() const noexcept { return *embedder_; }

  std::optional<Document> document(std::string_view doc_id) const;
  std::optional<Chunk> chunk(std::string_view doc_id, std::uint32_t seq) const;
  std::vector<float> embedding(std::size_t row) const;

  /// Directory with metadata.json and embeddings.f32 (little-endian float32, row-major).
  void save(const std::filesystem::path& dir) const;
  static std::unique_ptr<Index> load(const std::filesystem::path& dir, std::shared_ptr<const Embedder> embedder);

 private:
  std::shared_ptr<const Embedder> embedder_;
  std::size_t dim_;
  std::size_t window_;
  std::size_t overlap_;
  mutable std::shared_mutex mutex_;
  std::vector<Document> docs_;
  std::vector<Chunk> chunks_;
  std::vector<std::size_t> chunk_doc_;  // chunk row -> docs_ index
  std::vector<float> matrix_;           // rows x dim_
};

}  // namespace econlab::knowledge
