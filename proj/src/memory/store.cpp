#include "econlab/memory/store.hpp"

#include <array>

#include "econlab/error.hpp"
#include "econlab/util.hpp"

namespace econlab::memory {

using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::array<std::pair<E, const char*>, N>& table, const char* what) {
  for (const auto& [e, name] : table)
    if (s == name) return e;
  throw ValidationError(std::string("unknown ") + what + ": " + s, {what});
}

constexpr std::array<std::pair<Stage, const char*>, 4> kStages{{{Stage::idea, "idea"},
                                                                {Stage::design, "design"},
                                                                {Stage::execution, "execution"},
                                                                {Stage::analysis, "analysis"}}};
constexpr std::array<std::pair<RecordKind, const char*>, 4> kKinds{{{RecordKind::theoretical_context, "theoretical_context"},
                                                                    {RecordKind::experiment_spec, "experiment_spec"},
                                                                    {RecordKind::execution_trace, "execution_trace"},
                                                                    {RecordKind::outcome_synthesis, "outcome_synthesis"}}};
constexpr std::array<std::pair<RefKind, const char*>, 3> kRefKinds{
    {{RefKind::manifest, "manifest"}, {RefKind::config_hash, "config_hash"}, {RefKind::job_id, "job_id"}}};

template <typename E, std::size_t N>
std::string name_of(E e, const std::array<std::pair<E, const char*>, N>& table) {
  for (const auto& [v, name] : table)
    if (v == e) return name;
  return "unknown";
}

// Drops leading bytes until `s` fits in `n`, without splitting a UTF-8 sequence.
std::string keep_tail(const std::string& s, std::size_t n) {
  if (s.size() <= n) return s;
  std::size_t start = s.size() - n;
  while (start < s.size() && (static_cast<unsigned char>(s[start]) & 0xC0) == 0x80) ++start;
  return s.substr(start);
}

std::string keep_head(const std::string& s, std::size_t n) {
  if (s.size() <= n) return s;
  std::size_t end = n;
  while (end > 0 && (static_cast<unsigned char>(s[end]) & 0xC0) == 0x80) --end;
  return s.substr(0, end);
}

constexpr std::string_view kSeparator = "\n\n";
constexpr std::string_view kCut = "...";

}  // namespace

std::string to_string(Stage s) { return name_of(s, kStages); }
std::string to_string(RecordKind k) { return name_of(k, kKinds); }
std::string to_string(RefKind k) { return name_of(k, kRefKinds); }
Stage stage_from_string(const std::string& s) { return parse_enum(s, kStages, "stage"); }
RecordKind kind_from_string(const std::string& s) { return parse_enum(s, kKinds, "kind"); }
RefKind ref_kind_from_string(const std::string& s) { return parse_enum(s, kRefKinds, "ref kind"); }

const std::string* MemoryRecord::field(const std::string& key) const {
  for (const auto& [k, v] : body)
    if (k == key) return &v;
  return nullptr;
}

json to_json(const MemoryRecord& r) {
  json body = json::array();
  for (const auto& [k, v] : r.body) body.push_back(json::array({k, v}));
  json refs = json::array();
  for (const auto& ref : r.refs) refs.push_back({{"kind", to_string(ref.kind)}, {"id", ref.id}});
  return {{"record_id", r.record_id}, {"session_id", r.session_id}, {"stage", to_string(r.stage)},
          {"kind", to_string(r.kind)},  {"timestamp", r.timestamp},   {"body", body},
          {"text", r.text},             {"refs", refs}};
}

MemoryRecord record_from_json(const json& j) {
  MemoryRecord r;
  r.record_id = j.at("record_id").get<std::uint64_t>();
  r.session_id = j.at("session_id").get<std::string>();
  r.stage = stage_from_string(j.at("stage").get<std::string>());
  r.kind = kind_from_string(j.at("kind").get<std::string>());
  r.timestamp = j.value("timestamp", "");
  for (const auto& kv : j.at("body")) r.body.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
  r.text = j.value("text", "");
  for (const auto& ref : j.at("refs")) {
    r.refs.push_back({ref_kind_from_string(ref.at("kind").get<std::string>()), ref.at("id").get<std::string>()});
  }
  return r;
}

std::string render_record(const MemoryRecord& r) {
  std::string out = "[" + to_string(r.stage) + "/" + to_string(r.kind) + " #" + std::to_string(r.record_id) + "]";
  for (const auto& [k, v] : r.body) out += "\n" + k + ": " + v;
  if (!r.text.empty()) out += "\n" + r.text;
  if (!r.refs.empty()) {
    out += "\nrefs:";
    for (const auto& ref : r.refs) out += " " + to_string(ref.kind) + "=" + ref.id;
  }
  return out;
}

MemoryStore::MemoryStore(std::filesystem::path data_dir, RefResolver resolver)
    : data_dir_(std::move(data_dir)), resolver_(std::move(resolver)) {}

std::filesystem::path MemoryStore::file(const std::string& session_id) const {
  if (!util::is_safe_id(session_id)) throw ValidationError("invalid session id: " + session_id, {"session_id"});
  return data_dir_ / "sessions" / session_id / "memory.jsonl";
}

std::mutex& MemoryStore::session_mutex(const std::string& session_id) const {
  std::lock_guard lock(map_mutex_);
  auto& slot = session_mutexes_[session_id];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

std::vector<MemoryRecord> MemoryStore::load(const std::string& session_id) const {
  std::vector<MemoryRecord> out;
  for (const auto& line : util::read_lines(file(session_id))) out.push_back(record_from_json(json::parse(line)));
  return out;
}

std::uint64_t MemoryStore::append(const std::string& session_id, MemoryRecord record) {
  const auto path = file(session_id);
  for (const auto& ref : record.refs) {
    if (!resolver_ || !resolver_(session_id, ref)) {
      throw ValidationError("dangling ref " + to_string(ref.kind) + " " + ref.id, {ref.id});
    }
  }
  std::lock_guard lock(session_mutex(session_id));
  const auto existing = load(session_id);
  record.record_id = existing.empty() ? 1 : existing.back().record_id + 1;
  record.session_id = session_id;
  record.timestamp = util::now_iso8601();
  util::append_line(path, to_json(record).dump());
  return record.record_id;
}

std::vector<MemoryRecord> MemoryStore::query(const std::string& session_id, std::optional<RecordKind> kind,
                                             std::optional<Stage> stage) const {
  std::vector<MemoryRecord> all;
  {
    std::lock_guard lock(session_mutex(session_id));
    all = load(session_id);
  }
  std::vector<MemoryRecord> out;
  for (auto& r : all) {
    if (kind && r.kind != *kind) continue;
    if (stage && r.stage != *stage) continue;
    out.push_back(std::move(r));
  }
  return out;
}

std::string MemoryStore::render_context(const std::string& session_id, std::size_t budget) const {
  const auto records = query(session_id);
  std::vector<std::string> parts;  // newest first
  std::size_t used = 0;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    const std::string text = render_record(*it);
    const std::size_t sep = parts.empty() ? 0 : kSeparator.size();
    if (used + sep + text.size() <= budget) {
      parts.push_back(text);
      used += sep + text.size();
      continue;
    }
    if (parts.empty()) {
      // The newest record alone exceeds the budget: keep its head.
      parts.push_back(keep_head(text, budget));
    } else if (used + sep < budget) {
      // Cut the older record from the front so its most recent lines survive; skip
      // fragments too short to carry any content.
      const std::size_t room = budget - used - sep;
      const std::string header = text.substr(0, text.find(']') + 1);
      if (room > header.size() + kCut.size() + 16) {
        const std::string body = text.substr(header.size());
        parts.push_back(header + std::string(kCut) + keep_tail(body, room - header.size() - kCut.size()));
      }
    }
    break;
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += kSeparator;
    out += *it;
  }
  return out;
}

}  // namespace econlab::memory
