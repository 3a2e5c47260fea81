#include "econlab/knowledge/index.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "econlab/error.hpp"
#include "econlab/util.hpp"

namespace econlab::knowledge {

using nlohmann::json;

json to_json(const Document& d) {
  return {{"doc_id", d.doc_id}, {"title", d.title},          {"venue", d.venue},
          {"year", d.year},     {"abstract", d.abstract_text}, {"introduction", d.introduction}};
}

Document document_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("document must be a JSON object");
  std::vector<std::string> bad;
  auto str = [&](const char* key, bool required) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) bad.push_back(key);
      return {};
    }
    if (!it->is_string()) {
      bad.push_back(key);
      return {};
    }
    return it->get<std::string>();
  };
  Document d;
  d.doc_id = str("doc_id", true);
  d.title = str("title", false);
  d.venue = str("venue", false);
  d.abstract_text = str("abstract", true);
  d.introduction = str("introduction", false);
  auto y = j.find("year");
  if (y == j.end() || !y->is_number_integer() || y->get<int>() < 1000 || y->get<int>() > 9999) {
    bad.push_back("year");
  } else {
    d.year = y->get<int>();
  }
  if (!bad.empty()) {
    std::string msg = "invalid document";
    if (!d.doc_id.empty()) msg += " " + d.doc_id;
    msg += ": bad or missing field(s)";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg, bad);
  }
  return d;
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open corpus: " + path.string(), {"corpus"});
  std::vector<Document> docs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      docs.push_back(document_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what(), {"corpus"});
    } catch (const ValidationError& e) {
      throw ValidationError(path.filename().string() + " line " + std::to_string(lineno) + ": " + e.what(), e.fields());
    }
  }
  return docs;
}

std::vector<std::string> chunk_text(std::string_view text, std::size_t window, std::size_t overlap) {
  if (window <= overlap) {
    throw std::invalid_argument("chunk window (" + std::to_string(window) + ") must exceed overlap (" +
                                std::to_string(overlap) + ")");
  }
  std::vector<std::size_t> starts;  // byte offset of each code point
  for (std::size_t i = 0; i < text.size(); ++i) {
    if ((static_cast<unsigned char>(text[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  const std::size_t n = starts.size();
  std::vector<std::string> out;
  auto byte_at = [&](std::size_t cp) { return cp == n ? text.size() : starts[cp]; };
  for (std::size_t begin = 0; n > 0; begin += window - overlap) {
    const std::size_t end = std::min(begin + window, n);
    out.emplace_back(text.substr(byte_at(begin), byte_at(end) - byte_at(begin)));
    if (end == n) break;
  }
  return out;
}

bool SearchFilters::admits(const Document& doc) const noexcept {
  if (year_min && doc.year < *year_min) return false;
  if (year_max && doc.year > *year_max) return false;
  return venues.empty() || venues.count(doc.venue) > 0;
}

json to_json(const SearchFilters& f) {
  json j = json::object();
  if (f.year_min) j["year_min"] = *f.year_min;
  if (f.year_max) j["year_max"] = *f.year_max;
  if (!f.venues.empty()) j["venues"] = f.venues;
  return j;
}

SearchFilters filters_from_json(const json& j) {
  SearchFilters f;
  if (j.is_null()) return f;
  if (!j.is_object()) throw ValidationError("filters must be an object", {"filters"});
  for (const auto& [key, value] : j.items()) {
    if (key == "year_min" || key == "year_max") {
      if (!value.is_number_integer()) throw ValidationError(key + " must be an integer", {key});
      (key == "year_min" ? f.year_min : f.year_max) = value.get<int>();
    } else if (key == "venues") {
      if (!value.is_array()) throw ValidationError("venues must be an array of strings", {key});
      for (const auto& v : value) {
        if (!v.is_string()) throw ValidationError("venues must be an array of strings", {key});
        f.venues.insert(v.get<std::string>());
      }
    } else {
      throw ValidationError("unknown filter: " + key, {key});
    }
  }
  if (f.year_min && f.year_max && *f.year_min > *f.year_max) {
    throw ValidationError("year_min exceeds year_max", {"year_min", "year_max"});
  }
  return f;
}

bool hit_before(const Hit& a, const Hit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
  return a.seq < b.seq;
}

Index::Index(std::shared_ptr<const Embedder> embedder, std::size_t window, std::size_t overlap)
    : embedder_(std::move(embedder)), dim_(embedder_->dimension()), window_(window), overlap_(overlap) {
  if (window <= overlap) throw std::invalid_argument("chunk window must exceed overlap");
}

IngestReport Index::ingest(const std::vector<Document>& docs) {
  // Validate and embed everything before touching the index.
  std::vector<Chunk> new_chunks;
  std::vector<std::size_t> new_chunk_doc;
  std::vector<float> new_rows;
  IngestReport report;
  {
    std::shared_lock lock(mutex_);
    std::unordered_set<std::string> seen;
    for (const auto& d : docs_) seen.insert(d.doc_id);
    for (std::size_t i = 0; i < docs.size(); ++i) {
      const auto& d = docs[i];
      if (d.doc_id.empty()) throw ValidationError("document with empty doc_id", {"doc_id"});
      if (!seen.insert(d.doc_id).second) throw ValidationError("duplicate doc_id: " + d.doc_id, {d.doc_id});
      if (d.abstract_text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ValidationError("empty abstract in document " + d.doc_id, {d.doc_id});
      }
      std::uint32_t seq = 0;
      for (const std::string* part : {&d.abstract_text, &d.introduction}) {
        for (auto& text : chunk_text(*part, window_, overlap_)) {
          if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
          auto v = embedder_->embed(text);
          ++report.embedding_calls;
          if (v.size() != dim_) {
            throw ValidationError("embedding dimension mismatch for " + d.doc_id + ": got " + std::to_string(v.size()) +
                                      ", index uses " + std::to_string(dim_),
                                  {d.doc_id});
          }
          new_rows.insert(new_rows.end(), v.begin(), v.end());
          new_chunks.push_back({d.doc_id, seq++, std::move(text)});
          new_chunk_doc.push_back(docs_.size() + i);
        }
      }
    }
  }
  std::unique_lock lock(mutex_);
  docs_.insert(docs_.end(), docs.begin(), docs.end());
  chunks_.insert(chunks_.end(), std::make_move_iterator(new_chunks.begin()), std::make_move_iterator(new_chunks.end()));
  chunk_doc_.insert(chunk_doc_.end(), new_chunk_doc.begin(), new_chunk_doc.end());
  matrix_.insert(matrix_.end(), new_rows.begin(), new_rows.end());
  report.documents = docs.size();
  report.chunks = new_chunks.size();
  return report;
}

SearchResult Index::search(std::string_view query, std::size_t k, const SearchFilters& filters) const {
  const auto q = embedder_->embed(query);
  return search_vector(q, k, filters);
}

SearchResult Index::search_vector(std::span<const float> query, std::size_t k, const SearchFilters& filters) const {
  if (k < 1) throw ValidationError("k must be at least 1", {"k"});
  if (query.size() != dim_) throw ValidationError("query dimension mismatch", {"query"});
  std::shared_lock lock(mutex_);
  if (chunks_.empty()) throw StateError("index is empty");
  std::vector<Hit> hits;
  for (std::size_t r = 0; r < chunks_.size(); ++r) {
    if (!filters.admits(docs_[chunk_doc_[r]])) continue;
    const std::span<const float> row(matrix_.data() + r * dim_, dim_);
    hits.push_back({chunks_[r].doc_id, chunks_[r].seq, cosine(query, row)});
  }
  SearchResult result;
  result.short_result = hits.size() < k;
  const auto take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), hit_before);
  hits.resize(take);
  result.hits = std::move(hits);
  return result;
}

std::size_t Index::size() const {
  std::shared_lock lock(mutex_);
  return chunks_.size();
}

std::size_t Index::document_count() const {
  std::shared_lock lock(mutex_);
  return docs_.size();
}

std::optional<Document> Index::document(std::string_view doc_id) const {
  std::shared_lock lock(mutex_);
  for (const auto& d : docs_)
    if (d.doc_id == doc_id) return d;
  return std::nullopt;
}

std::optional<Chunk> Index::chunk(std::string_view doc_id, std::uint32_t seq) const {
  std::shared_lock lock(mutex_);
  for (const auto& c : chunks_)
    if (c.doc_id == doc_id && c.seq == seq) return c;
  return std::nullopt;
}

std::vector<float> Index::embedding(std::size_t row) const {
  std::shared_lock lock(mutex_);
  if (row >= chunks_.size()) throw std::out_of_range("embedding row out of range");
  return {matrix_.begin() + static_cast<std::ptrdiff_t>(row * dim_),
          matrix_.begin() + static_cast<std::ptrdiff_t>((row + 1) * dim_)};
}

namespace {

void to_little_endian(std::vector<float>& values) {
  if constexpr (std::endian::native == std::endian::big) {
    for (auto& v : values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&v, &bits, 4);
    }
  }
}

}  // namespace

void Index::save(const std::filesystem::path& dir) const {
  std::shared_lock lock(mutex_);
  json meta;
  meta["format"] = 1;
  meta["embedder"] = embedder_->name();
  meta["dimension"] = dim_;
  meta["rows"] = chunks_.size();
  meta["window"] = window_;
  meta["overlap"] = overlap_;
  meta["documents"] = json::array();
  for (const auto& d : docs_) meta["documents"].push_back(to_json(d));
  meta["chunks"] = json::array();
  for (const auto& c : chunks_) meta["chunks"].push_back({{"doc_id", c.doc_id}, {"seq", c.seq}, {"text", c.text}});

  std::vector<float> le = matrix_;
  to_little_endian(le);
  std::filesystem::create_directories(dir);
  util::write_file_atomic(dir / "embeddings.f32",
                          std::string_view(reinterpret_cast<const char*>(le.data()), le.size() * sizeof(float)));
  util::write_file_atomic(dir / "metadata.json", meta.dump(2));
}

std::unique_ptr<Index> Index::load(const std::filesystem::path& dir, std::shared_ptr<const Embedder> embedder) {
  json meta;
  try {
    meta = json::parse(util::read_file(dir / "metadata.json"));
  } catch (const std::exception& e) {
    throw ValidationError("cannot read index metadata in " + dir.string() + ": " + e.what(), {"index"});
  }
  const auto dim = meta.at("dimension").get<std::size_t>();
  const auto rows = meta.at("rows").get<std::size_t>();
  if (dim != embedder->dimension()) {
    throw ValidationError("index dimension " + std::to_string(dim) + " does not match embedder dimension " +
                              std::to_string(embedder->dimension()),
                          {"dimension"});
  }
  if (meta.at("embedder").get<std::string>() != embedder->name()) {
    throw ValidationError("index was built with embedder " + meta.at("embedder").get<std::string>() + ", not " +
                              embedder->name(),
                          {"embedder"});
  }
  const std::string raw = util::read_file(dir / "embeddings.f32");
  if (raw.size() != rows * dim * sizeof(float)) {
    throw ValidationError("embeddings.f32 has " + std::to_string(raw.size()) + " bytes, expected " +
                              std::to_string(rows * dim * sizeof(float)),
                          {"index"});
  }
  auto index = std::make_unique<Index>(std::move(embedder), meta.at("window").get<std::size_t>(),
                                       meta.at("overlap").get<std::size_t>());
  for (const auto& d : meta.at("documents")) index->docs_.push_back(document_from_json(d));
  std::unordered_map<std::string, std::size_t> doc_pos;
  for (std::size_t i = 0; i < index->docs_.size(); ++i) doc_pos[index->docs_[i].doc_id] = i;
  for (const auto& c : meta.at("chunks")) {
    Chunk chunk{c.at("doc_id").get<std::string>(), c.at("seq").get<std::uint32_t>(), c.at("text").get<std::string>()};
    auto it = doc_pos.find(chunk.doc_id);
    if (it == doc_pos.end()) throw ValidationError("chunk refers to unknown document " + chunk.doc_id, {"index"});
    index->chunk_doc_.push_back(it->second);
    index->chunks_.push_back(std::move(chunk));
  }
  if (index->chunks_.size() != rows) throw ValidationError("index metadata row count mismatch", {"index"});
  index->matrix_.resize(rows * dim);
  std::memcpy(index->matrix_.data(), raw.data(), raw.size());
  to_little_endian(index->matrix_);  // the swap is its own inverse
  return index;
}

}  // namespace econlab::knowledge
