#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace econlab::memory {

enum class Stage { idea, design, execution, analysis };
enum class RecordKind { theoretical_context, experiment_spec, execution_trace, outcome_synthesis };
enum class RefKind { manifest, config_hash, job_id };

std::string to_string(Stage s);
std::string to_string(RecordKind k);
std::string to_string(RefKind k);
Stage stage_from_string(const std::string& s);
RecordKind kind_from_string(const std::string& s);
RefKind ref_kind_from_string(const std::string& s);

struct Ref {
  RefKind kind = RefKind::manifest;
  std::string id;

  friend bool operator==(const Ref&, const Ref&) = default;
};

struct MemoryRecord {
  std::uint64_t record_id = 0;  // assigned by append
  std::string session_id;
  Stage stage = Stage::idea;
  RecordKind kind = RecordKind::theoretical_context;
  std::string timestamp;  // assigned by append
  std::vector<std::pair<std::string, std::string>> body;
  std::string text;
  std::vector<Ref> refs;

  const std::string* field(const std::string& key) const;
};

nlohmann::json to_json(const MemoryRecord& r);
MemoryRecord record_from_json(const nlohmann::json& j);

/// Returns true when `ref` names something that exists for `session_id`.
using RefResolver = std::function<bool(const std::string& session_id, const Ref& ref)>;

/// Append-only per-session record log at <data_dir>/sessions/<session_id>/memory.jsonl.
class MemoryStore {
 public:
  MemoryStore(std::filesystem::path data_dir, RefResolver resolver);

  /// Persists the record and returns its id (1, 2, ... per session). Throws ValidationError
  /// naming the first ref that does not resolve.
  std::uint64_t append(const std::string& session_id, MemoryRecord record);

  /// Matching records in id order. Unknown sessions yield an empty list.
  std::vector<MemoryRecord> query(const std::string& session_id, std::optional<RecordKind> kind = std::nullopt,
                                  std::optional<Stage> stage = std::nullopt) const;

  /// Records rendered oldest to newest, each headed "[stage/kind #id]", within `budget`
  /// characters. Records are taken newest first; the first one that does not fit is cut
  /// from its front and everything older is dropped. Only a newest record longer than the
  /// whole budget is itself cut.
  std::string render_context(const std::string& session_id, std::size_t budget) const;

  std::filesystem::path file(const std::string& session_id) const;

 private:
  std::mutex& session_mutex(const std::string& session_id) const;
  std::vector<MemoryRecord> load(const std::string& session_id) const;

  std::filesystem::path data_dir_;
  RefResolver resolver_;
  mutable std::mutex map_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::mutex>> session_mutexes_;
};

/// Plain-text form used by render_context.
std::string render_record(const MemoryRecord& r);

}  // namespace econlab::memory
