#include "econlab/orchestrator/workflow.hpp"

#include <chrono>
#include <random>

#include "econlab/error.hpp"
#include "econlab/util.hpp"

namespace econlab::orchestrator {

namespace fs = std::filesystem;

std::string to_string(SessionStage s) {
  switch (s) {
    case SessionStage::idea: return "idea";
    case SessionStage::design: return "design";
    case SessionStage::execution: return "execution";
    case SessionStage::analysis: return "analysis";
    case SessionStage::complete: return "complete";
  }
  return "idea";
}

SessionStage session_stage_from_string(const std::string& s) {
  for (auto st : {SessionStage::idea, SessionStage::design, SessionStage::execution, SessionStage::analysis,
                  SessionStage::complete}) {
    if (to_string(st) == s) return st;
  }
  throw ValidationError("unknown session stage: " + s, {"stage"});
}

namespace {

json chunk_json(const knowledge::RetrievedChunk& c) {
  return {{"doc_id", c.hit.doc_id}, {"seq", c.hit.seq}, {"score", c.hit.score}, {"title", c.title},
          {"venue", c.venue},       {"year", c.year},   {"text", c.text}};
}

void transition(json& state, SessionStage to, std::uint64_t record_id) {
  state["history"].push_back(
      {{"from", state["stage"]}, {"to", to_string(to)}, {"at", util::now_iso8601()}, {"record_id", record_id}});
  state["stage"] = to_string(to);
}

json summary(const json& state) { return {{"session_id", state["session_id"]}, {"stage", state["stage"]}}; }

// Closes the current round so a new idea starts from a clean slate; the round stays readable.
void archive_round(json& state) {
  state["rounds"].push_back({{"intuition", state["intuition"]},
                             {"hypothesis", state["hypothesis"]},
                             {"design", state["design"]},
                             {"bundle", state["bundle"]},
                             {"report", state["report"]}});
  for (const char* k : {"idea", "hypothesis", "design", "bundle", "report", "draft_intuition"}) state[k] = nullptr;
}

}  // namespace

Workflow::Workflow(WorkflowOptions options)
    : opts_(std::move(options)), manifests_(opts_.data_dir), memory_(opts_.data_dir, resolver()) {
  if (opts_.toolbox == nullptr) throw ValidationError("workflow needs a toolbox", {"toolbox"});
  if (!opts_.provider) throw ValidationError("workflow needs a text provider", {"provider"});
}

memory::RefResolver Workflow::resolver() const {
  return [this](const std::string& session, const memory::Ref& ref) {
    switch (ref.kind) {
      case memory::RefKind::manifest: return manifests_.find(session, ref.id).has_value();
      case memory::RefKind::config_hash: return opts_.toolbox->has_config(ref.id);
      case memory::RefKind::job_id: return opts_.toolbox->has_job(ref.id);
    }
    return false;
  };
}

fs::path Workflow::session_file(const std::string& session_id) const {
  return opts_.data_dir / "sessions" / session_id / "session.json";
}

Workflow::Slot& Workflow::slot(const std::string& session_id) const {
  if (!util::is_safe_id(session_id)) throw NotFoundError("session", session_id);
  std::lock_guard lock(slots_mutex_);
  auto& s = slots_[session_id];
  if (!s) s = std::make_unique<Slot>();
  return *s;
}

json& Workflow::load_locked(Slot& s, const std::string& session_id) const {
  if (s.state.is_null()) {
    const auto file = session_file(session_id);
    if (!fs::exists(file)) throw NotFoundError("session", session_id);
    s.state = json::parse(util::read_file(file));
  }
  return s.state;
}

void Workflow::save_locked(const json& state) const {
  util::write_file_atomic(session_file(state.at("session_id").get<std::string>()), state.dump(2));
}

void Workflow::require_stage(const json& state, SessionStage stage, const std::string& action) const {
  if (state.at("stage") != to_string(stage)) {
    throw StateError(action + " needs the session in stage " + to_string(stage) + ", but it is in " +
                     state.at("stage").get<std::string>());
  }
}

json Workflow::idempotent(const std::string& session_id, const std::string& action,
                          const std::optional<std::string>& request_id, const std::function<json(json&)>& act) {
  auto& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  auto& state = load_locked(s, session_id);
  const std::string key = request_id ? action + ":" + *request_id : std::string{};
  if (request_id) {
    if (auto it = state["responses"].find(key); it != state["responses"].end()) return *it;
  }
  // Work on a copy so a throwing action leaves the stored state untouched.
  json next = state;
  json response = act(next);
  if (request_id) next["responses"][key] = response;
  next["version"] = next.value("version", 0) + 1;
  save_locked(next);
  state = std::move(next);
  return response;
}

json Workflow::create_session(const std::optional<std::string>& request_id) {
  std::string id;
  if (request_id) {
    id = "s-" + util::sha256_hex("session:" + *request_id).substr(0, 16);
  } else {
    std::random_device rd;
    std::lock_guard lock(slots_mutex_);
    id = "s-" + util::sha256_hex(util::now_iso8601() + std::to_string(++counter_) + std::to_string(rd()))
                    .substr(0, 16);
  }
  auto& s = slot(id);
  std::lock_guard lock(s.mutex);
  if (fs::exists(session_file(id))) return summary(load_locked(s, id));
  s.state = {{"session_id", id},
             {"created_at", util::now_iso8601()},
             {"stage", to_string(SessionStage::idea)},
             {"version", 1},
             {"intuition", nullptr},
             {"draft_intuition", nullptr},
             {"idea", nullptr},
             {"hypothesis", nullptr},
             {"design", nullptr},
             {"bundle", nullptr},
             {"report", nullptr},
             {"running_jobs", json::array()},
             {"records", json::object()},
             {"history", json::array()},
             {"rounds", json::array()},
             {"responses", json::object()}};
  save_locked(s.state);
  return summary(s.state);
}

json Workflow::run_idea(json& state, const std::string& text) {
  if (!opts_.index || opts_.index->size() == 0) {
    throw StateError("knowledge index is empty; ingest a corpus first");
  }
  const std::string sid = state["session_id"];
  const auto r = develop_idea({*opts_.index, manifests_, memory_, *opts_.registry, *opts_.provider}, sid, text, opts_.idea);
  json idea = {{"manifest_id", r.manifest_id}, {"record_id", r.record_id}, {"evidence", json::array()}};
  for (const auto& c : r.evidence) idea["evidence"].push_back(chunk_json(c));
  if (const auto* h = std::get_if<Hypothesis>(&r.outcome)) {
    idea["outcome"] = "hypothesis";
    idea["hypothesis"] = to_json(*h);
    state["hypothesis"] = idea["hypothesis"];
    state["records"]["hypothesis"] = r.record_id;
  } else {
    idea["outcome"] = "diagnosis";
    idea["diagnosis"] = to_json(std::get<FeasibilityDiagnosis>(r.outcome));
    state["hypothesis"] = nullptr;
  }
  state["intuition"] = text;
  state["idea"] = idea;
  json out = summary(state);
  out["idea"] = idea;
  return out;
}

json Workflow::submit_intuition(const std::string& session_id, const std::string& text,
                                const std::optional<std::string>& request_id) {
  return idempotent(session_id, "intuition", request_id, [&](json& state) {
    require_stage(state, SessionStage::idea, "intuition");
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) throw ValidationError("intuition text is empty", {"text"});
    return run_idea(state, text);
  });
}

json Workflow::confirm_hypothesis(const std::string& session_id, const json& body,
                                  const std::optional<std::string>& request_id) {
  return idempotent(session_id, "confirm-hypothesis", request_id, [&](json& state) {
    require_stage(state, SessionStage::idea, "confirm-hypothesis");
    if (state["hypothesis"].is_null()) throw StateError("no feasible hypothesis to confirm; submit an intuition first");
    DesignOptions options = opts_.design;
    if (body.contains("seeds")) {
      const auto& seeds = body["seeds"];
      if (!seeds.is_array() || seeds.empty()) throw ValidationError("seeds must be a non-empty array", {"seeds"});
      options.seeds.clear();
      for (const auto& s : seeds) {
        if (!s.is_number_integer() || s.get<std::int64_t>() < 0)
          throw ValidationError("seeds must be non-negative integers", {"seeds"});
        options.seeds.push_back(s.get<std::uint64_t>());
      }
    }
    if (body.contains("horizon")) {
      if (!body["horizon"].is_number_integer() || body["horizon"].get<std::int64_t>() < 1)
        throw ValidationError("horizon must be an integer >= 1", {"horizon"});
      options.horizon = body["horizon"].get<int>();
    }
    const auto hyp = hypothesis_from_json(state["hypothesis"]);
    const auto design = design_experiment(hyp, *opts_.registry, *opts_.toolbox, options);

    memory::MemoryRecord rec;
    rec.stage = memory::Stage::design;
    rec.kind = memory::RecordKind::experiment_spec;
    std::string seeds;
    for (auto s : design.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
    std::string metrics;
    for (const auto& m : design.metrics) metrics += (metrics.empty() ? "" : ",") + m;
    std::string levers;
    for (const auto& l : design.declared_interventions) levers += (levers.empty() ? "" : ",") + l;
    rec.body = {{"design_id", design.design_id}, {"interventions", levers}, {"metrics", metrics},
                {"seeds", seeds},                {"horizon", std::to_string(design.horizon)},
                {"derived_from", derived_from_field({state["records"]["hypothesis"].get<std::uint64_t>()})}};
    rec.text = to_json(design).dump();
    for (const auto& b : design.config_hashes) rec.refs.push_back({memory::RefKind::config_hash, b.config_hash});
    const auto id = memory_.append(state["session_id"], std::move(rec));

    state["design"] = to_json(design);
    state["records"]["spec"] = id;
    transition(state, SessionStage::design, id);
    json out = summary(state);
    out["design"] = state["design"];
    out["record_id"] = id;
    return out;
  });
}

json Workflow::confirm_design(const std::string& session_id, const std::optional<std::string>& request_id) {
  return idempotent(session_id, "confirm-design", request_id, [&](json& state) {
    require_stage(state, SessionStage::design, "confirm-design");
    memory::MemoryRecord rec;
    rec.stage = memory::Stage::design;
    rec.kind = memory::RecordKind::experiment_spec;
    rec.body = {{"event", "design_confirmed"},
                {"design_id", state["design"]["design_id"]},
                {"derived_from", derived_from_field({state["records"]["spec"].get<std::uint64_t>()})}};
    rec.text = "design confirmed for execution";
    const auto id = memory_.append(state["session_id"], std::move(rec));
    state["records"]["confirm"] = id;
    transition(state, SessionStage::execution, id);
    return summary(state);
  });
}

json Workflow::execute(const std::string& session_id, const std::optional<std::string>& request_id) {
  return idempotent(session_id, "execute", request_id, [&](json& state) {
    require_stage(state, SessionStage::execution, "execute");
    const std::string sid = state["session_id"];
    const auto design = design_from_json(state["design"]);
    const auto hyp = hypothesis_from_json(state["hypothesis"]);
    const auto bundle = execute_design(design, *opts_.toolbox, &memory_, sid, state["records"]["spec"].get<std::uint64_t>(),
                                       [&](const ResultBundle& started) {
                                         // Published early so readers can follow the jobs.
                                         json visible = state;
                                         visible["running_jobs"] = json::array();
                                         for (const auto& r : started.runs) visible["running_jobs"].push_back(r.job_id);
                                         save_locked(visible);
                                       });
    state["running_jobs"] = json::array();
    state["bundle"] = to_json(bundle);
    json out = summary(state);
    out["bundle"] = state["bundle"];
    if (!bundle.complete) {
      out["report"] = nullptr;
      out["error"] = "result bundle is partial; fix the failed jobs and execute again";
      return out;
    }
    const auto report = analyze(bundle, hyp, design, *opts_.registry);

    std::set<std::string> jobs;
    for (const auto& r : bundle.runs) jobs.insert(r.job_id);
    std::vector<std::uint64_t> traces;
    for (const auto& r : memory_.query(sid, memory::RecordKind::execution_trace)) {
      if (const auto* j = r.field("job_id"); j && jobs.count(*j)) traces.push_back(r.record_id);
    }
    memory::MemoryRecord rec;
    rec.stage = memory::Stage::analysis;
    rec.kind = memory::RecordKind::outcome_synthesis;
    rec.body = {{"design_id", design.design_id},
                {"verdict", to_string(report.verdict)},
                {"derived_from", derived_from_field(traces)}};
    for (const auto& m : report.metrics) {
      std::string line = m.name + " (" + m.aggregation + "): control " + std::to_string(m.control_mean) + ", treatment " +
                         std::to_string(m.treatment_mean);
      if (m.relative_diff) line += ", relative " + std::to_string(*m.relative_diff * 100.0) + "%";
      line += m.sign_consistent_across_seeds ? ", same sign in every seed" : ", sign differs across seeds";
      rec.text += (rec.text.empty() ? "" : "\n") + line;
    }
    const auto id = memory_.append(sid, std::move(rec));

    state["report"] = to_json(report);
    state["records"]["outcome"] = id;
    transition(state, SessionStage::analysis, id);
    if (report.verdict == Verdict::supported) {
      transition(state, SessionStage::complete, id);
    } else if (auto draft = next_intuition(state["intuition"].get<std::string>(), report)) {
      state["draft_intuition"] = *draft;
    }
    out = summary(state);
    out["bundle"] = state["bundle"];
    out["report"] = state["report"];
    out["draft_intuition"] = state["draft_intuition"];
    return out;
  });
}

json Workflow::iterate(const std::string& session_id, bool accept, const std::optional<std::string>& text,
                       const std::optional<std::string>& request_id) {
  return idempotent(session_id, "iterate", request_id, [&](json& state) {
    require_stage(state, SessionStage::analysis, "iterate");
    const std::string sid = state["session_id"];
    const std::string draft = text ? *text : state["draft_intuition"].is_string() ? state["draft_intuition"].get<std::string>() : "";
    memory::MemoryRecord rec;
    rec.stage = memory::Stage::idea;
    rec.kind = memory::RecordKind::theoretical_context;
    rec.body = {{"event", accept ? "draft_accepted" : "draft_rejected"},
                {"derived_from", derived_from_field({state["records"]["outcome"].get<std::uint64_t>()})}};
    rec.text = draft;
    const auto id = memory_.append(sid, std::move(rec));
    archive_round(state);
    transition(state, SessionStage::idea, id);
    if (accept && draft.find_first_not_of(" \t\r\n") != std::string::npos) return run_idea(state, draft);
    return summary(state);
  });
}

json Workflow::session(const std::string& session_id) const {
  if (!util::is_safe_id(session_id) || !fs::exists(session_file(session_id))) throw NotFoundError("session", session_id);
  // Read from disk so a long execute holding the session lock does not block readers.
  auto state = json::parse(util::read_file(session_file(session_id)));
  state.erase("responses");
  return state;
}

json Workflow::memory(const std::string& session_id) const {
  session(session_id);
  json out = json::array();
  for (const auto& r : memory_.query(session_id)) out.push_back(memory::to_json(r));
  return {{"session_id", session_id}, {"records", out}};
}

json Workflow::results(const std::string& session_id) const {
  const auto state = session(session_id);
  return {{"session_id", session_id}, {"stage", state["stage"]},   {"design", state["design"]},
          {"bundle", state["bundle"]}, {"report", state["report"]}, {"rounds", state["rounds"]}};
}

std::vector<std::string> Workflow::list_sessions() const {
  std::vector<std::string> out;
  const auto dir = opts_.data_dir / "sessions";
  if (!fs::exists(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (fs::exists(e.path() / "session.json")) out.push_back(e.path().filename().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace econlab::orchestrator
