#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "econlab/knowledge/index.hpp"
#include "econlab/knowledge/manifest.hpp"
#include "econlab/memory/store.hpp"
#include "econlab/orchestrator/pipeline.hpp"
#include "econlab/toolbox/toolbox.hpp"

namespace econlab::orchestrator {

enum class SessionStage { idea, design, execution, analysis, complete };
std::string to_string(SessionStage s);
SessionStage session_stage_from_string(const std::string& s);

struct WorkflowOptions {
  std::filesystem::path data_dir;
  std::shared_ptr<const knowledge::Index> index;
  std::shared_ptr<behavior::TextProvider> provider;
  toolbox::Toolbox* toolbox = nullptr;
  const econ::ParameterRegistry* registry = &econ::default_registry();
  IdeaOptions idea;
  DesignOptions design;
};

/// Interactive sessions moving idea -> design -> execution -> analysis -> complete | idea.
/// Each session lives in <data_dir>/sessions/<id>/ (session.json, memory.jsonl,
/// manifests.jsonl). State-changing calls take an optional request id; repeating a call with
/// the same id returns the stored response without acting again.
///
/// Errors: NotFoundError for unknown sessions, StateError for a call in the wrong stage,
/// ValidationError for bad input.
class Workflow {
 public:
  explicit Workflow(WorkflowOptions options);

  json create_session(const std::optional<std::string>& request_id = std::nullopt);
  json submit_intuition(const std::string& session_id, const std::string& text,
                        const std::optional<std::string>& request_id = std::nullopt);
  /// Body may carry "seeds" and "horizon" to override the design defaults.
  json confirm_hypothesis(const std::string& session_id, const json& body = json::object(),
                          const std::optional<std::string>& request_id = std::nullopt);
  json confirm_design(const std::string& session_id, const std::optional<std::string>& request_id = std::nullopt);
  /// Blocks until every job has finished.
  json execute(const std::string& session_id, const std::optional<std::string>& request_id = std::nullopt);
  /// Accepting runs idea development on the draft (or on `text` when given); rejecting
  /// drops the draft. Either way the session returns to the idea stage.
  json iterate(const std::string& session_id, bool accept, const std::optional<std::string>& text = std::nullopt,
               const std::optional<std::string>& request_id = std::nullopt);

  json session(const std::string& session_id) const;
  json memory(const std::string& session_id) const;
  json results(const std::string& session_id) const;
  std::vector<std::string> list_sessions() const;

  memory::MemoryStore& memory_store() noexcept { return memory_; }
  knowledge::ManifestStore& manifest_store() noexcept { return manifests_; }
  memory::RefResolver resolver() const;

 private:
  struct Slot {
    std::mutex mutex;
    json state;  // null until loaded
  };

  Slot& slot(const std::string& session_id) const;
  json& load_locked(Slot& s, const std::string& session_id) const;
  void save_locked(const json& state) const;
  std::filesystem::path session_file(const std::string& session_id) const;
  json idempotent(const std::string& session_id, const std::string& action, const std::optional<std::string>& request_id,
                  const std::function<json(json& state)>& act);
  json run_idea(json& state, const std::string& text);
  void require_stage(const json& state, SessionStage stage, const std::string& action) const;

  WorkflowOptions opts_;
  knowledge::ManifestStore manifests_;
  memory::MemoryStore memory_;
  mutable std::mutex slots_mutex_;
  mutable std::map<std::string, std::unique_ptr<Slot>> slots_;
  std::uint64_t counter_ = 0;
};

}  // namespace econlab::orchestrator
