#include "econlab/toolbox/toolbox.hpp"

#include <cstdio>
#include <iostream>

#include "econlab/econ/economy.hpp"
#include "econlab/error.hpp"
#include "econlab/util.hpp"

namespace econlab::toolbox {

std::string canonical_json(const json& value) { return value.dump(-1, ' ', false, json::error_handler_t::strict); }

std::string config_hash(const econ::SimConfig& config) {
  // Round-trip through the parser so lever values are in normalized form.
  return util::sha256_hex(canonical_json(econ::to_json(econ::parse_config(econ::to_json(config)))));
}

std::string to_string(JobState s) {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::succeeded: return "succeeded";
    case JobState::failed: return "failed";
  }
  return "unknown";
}

JobState job_state_from_string(const std::string& s) {
  for (auto st : {JobState::queued, JobState::running, JobState::succeeded, JobState::failed})
    if (to_string(st) == s) return st;
  throw ValidationError("unknown job state: " + s, {"state"});
}

std::string to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::unknown_tool: return "unknown_tool";
    case ErrorCategory::invalid_args: return "invalid_args";
    case ErrorCategory::unknown_job: return "unknown_job";
    case ErrorCategory::execution_failure: return "execution_failure";
  }
  return "unknown";
}

json to_json(const LogEntry& e) {
  return {{"ts", e.ts}, {"level", e.level}, {"category", e.category}, {"message", e.message}};
}

json to_json(const JobStatus& s) {
  json j = {{"job_id", s.job_id},
            {"config_hash", s.config_hash},
            {"seed", s.seed},
            {"horizon", s.horizon},
            {"state", to_string(s.state)},
            {"progress", {{"done", s.progress_done}, {"total", s.progress_total}}}};
  if (s.error_category) j["error"] = {{"category", to_string(*s.error_category)}, {"message", s.error}};
  return j;
}

namespace {

JobStatus status_from_json(const json& j) {
  JobStatus s;
  s.job_id = j.at("job_id").get<std::string>();
  s.config_hash = j.at("config_hash").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.horizon = j.at("horizon").get<int>();
  s.state = job_state_from_string(j.at("state").get<std::string>());
  s.progress_done = j.at("progress").at("done").get<std::int64_t>();
  s.progress_total = j.at("progress").at("total").get<std::int64_t>();
  if (auto e = j.find("error"); e != j.end()) {
    s.error_category = ErrorCategory::execution_failure;
    s.error = e->at("message").get<std::string>();
  }
  return s;
}

bool finished(JobState s) { return s == JobState::succeeded || s == JobState::failed; }

}  // namespace

Toolbox::Toolbox(ToolboxOptions options) : opts_(std::move(options)) {
  if (opts_.workers == 0) opts_.workers = 1;
  if (opts_.registry == nullptr) opts_.registry = &econ::default_registry();
  std::filesystem::create_directories(opts_.data_dir / "jobs");
  std::filesystem::create_directories(opts_.data_dir / "configs");
  load_existing();
  for (std::size_t i = 0; i < opts_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Toolbox::~Toolbox() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

void Toolbox::load_existing() {
  for (const auto& entry : std::filesystem::directory_iterator(opts_.data_dir / "configs")) {
    if (entry.path().extension() != ".json") continue;
    configs_[entry.path().stem().string()] = util::read_file(entry.path());
  }
  for (const auto& entry : std::filesystem::directory_iterator(opts_.data_dir / "jobs")) {
    const auto meta = entry.path() / "job.json";
    if (!std::filesystem::exists(meta)) continue;
    auto job = std::make_unique<Job>();
    try {
      job->status = status_from_json(json::parse(util::read_file(meta)));
      job->config = econ::parse_config(json::parse(util::read_file(entry.path() / "config.json")));
      for (const auto& line : util::read_lines(entry.path() / "logs.jsonl")) {
        const auto j = json::parse(line);
        job->logs.push_back({j.at("ts"), j.at("level"), j.at("category"), j.at("message")});
      }
    } catch (const std::exception&) {
      continue;  // unreadable leftovers are ignored, not fatal
    }
    if (!finished(job->status.state)) {
      // Left unfinished by a previous process.
      job->status.error_category = ErrorCategory::execution_failure;
      job->status.error = "interrupted: the process stopped before the job finished";
      log_locked(*job, "error", "lifecycle", job->status.error);
      job->status.state = JobState::failed;
      persist_status_locked(*job);
    }
    const auto& id = job->status.job_id;
    unsigned long long n = 0;
    if (std::sscanf(id.c_str(), "job-%llu", &n) == 1) next_job_ = std::max<std::uint64_t>(next_job_, n + 1);
    jobs_[id] = std::move(job);
  }
}

json Toolbox::inspect_parameters() const { return opts_.registry->to_json(); }

std::string Toolbox::register_config(const econ::SimConfig& config) {
  const auto normalized = econ::parse_config(econ::to_json(config), *opts_.registry);
  const std::string canonical = canonical_json(econ::to_json(normalized));
  const std::string hash = util::sha256_hex(canonical);
  std::lock_guard lock(mutex_);
  if (!configs_.count(hash)) {
    util::write_file_atomic(opts_.data_dir / "configs" / (hash + ".json"), canonical);
    configs_[hash] = canonical;
  }
  return hash;
}

std::optional<econ::SimConfig> Toolbox::registered_config(const std::string& hash) const {
  std::string text;
  {
    std::lock_guard lock(mutex_);
    auto it = configs_.find(hash);
    if (it == configs_.end()) return std::nullopt;
    text = it->second;
  }
  return econ::parse_config(json::parse(text), *opts_.registry);
}

bool Toolbox::has_config(const std::string& hash) const {
  std::lock_guard lock(mutex_);
  return configs_.count(hash) > 0;
}

namespace {

void reject_unknown_args(const json& args, std::initializer_list<const char*> allowed) {
  std::vector<std::string> bad;
  for (const auto& [key, value] : args.items()) {
    bool ok = false;
    for (const char* a : allowed) ok |= key == a;
    if (!ok) bad.push_back(key);
  }
  if (!bad.empty()) {
    std::string msg = "unknown argument(s):";
    for (const auto& b : bad) msg += " " + b;
    throw ValidationError(msg, bad);
  }
}

}  // namespace

json Toolbox::init_environment(const json& args) {
  reject_unknown_args(args, {"n_households", "n_firms", "n_goods", "skill_dims", "horizon", "seed"});
  const auto config = econ::parse_config(args, *opts_.registry);
  const auto hash = register_config(config);
  return {{"config_hash", hash}, {"config", econ::to_json(config)}, {"registry", inspect_parameters()}};
}

json Toolbox::configure_experiment(const json& args) {
  reject_unknown_args(args, {"config"});
  auto it = args.find("config");
  if (it == args.end()) throw ValidationError("missing argument: config", {"config"});
  const auto config = econ::parse_config(*it, *opts_.registry);
  const auto hash = register_config(config);
  return {{"config_hash", hash}, {"config", econ::to_json(config)}};
}

std::string Toolbox::start_job(const std::string& hash, std::optional<std::uint64_t> seed, std::optional<int> horizon) {
  auto config = registered_config(hash);
  if (!config) throw ValidationError("unknown config_hash: " + hash + " (register it with configure_experiment first)", {"config_hash"});
  if (seed && *seed != config->seed) {
    throw ValidationError("seed " + std::to_string(*seed) + " does not match the registered config's seed " +
                              std::to_string(config->seed),
                          {"seed"});
  }
  if (horizon && *horizon != config->horizon) {
    throw ValidationError("horizon " + std::to_string(*horizon) + " does not match the registered config's horizon " +
                              std::to_string(config->horizon),
                          {"horizon"});
  }
  std::lock_guard lock(mutex_);
  char id[32];
  std::snprintf(id, sizeof id, "job-%06llu", static_cast<unsigned long long>(next_job_++));
  auto job = std::make_unique<Job>();
  job->status.job_id = id;
  job->status.config_hash = hash;
  job->status.seed = config->seed;
  job->status.horizon = config->horizon;
  job->status.progress_total = config->horizon;
  job->config = *config;
  const auto dir = job_dir(id);
  std::filesystem::create_directories(dir);
  util::write_file_atomic(dir / "config.json", configs_.at(hash));
  log_locked(*job, "info", "lifecycle", "queued config " + hash + " seed " + std::to_string(config->seed) +
                                            " horizon " + std::to_string(config->horizon));
  persist_status_locked(*job);
  jobs_[id] = std::move(job);
  queue_.push_back(id);
  queue_cv_.notify_one();
  return id;
}

Toolbox::Job& Toolbox::job_locked(const std::string& job_id) const {
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) throw ToolError(ErrorCategory::unknown_job, "unknown job: " + job_id);
  return *it->second;
}

bool Toolbox::has_job(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return jobs_.count(job_id) > 0;
}

JobStatus Toolbox::poll_status(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return job_locked(job_id).status;
}

std::vector<LogEntry> Toolbox::collect_logs(const std::string& job_id) const {
  std::lock_guard lock(mutex_);
  return job_locked(job_id).logs;
}

json Toolbox::export_results(const std::string& job_id) const {
  JobStatus status = poll_status(job_id);
  if (status.state != JobState::succeeded) {
    std::string msg = "job " + job_id + " is " + to_string(status.state) + "; results exist only for succeeded jobs";
    if (status.state == JobState::failed) msg += " (" + status.error + ")";
    throw ToolError(ErrorCategory::execution_failure, msg);
  }
  return json::parse(util::read_file(job_dir(job_id) / "result.json"));
}

JobStatus Toolbox::wait(const std::string& job_id, std::uint64_t seen_version, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  Job& job = job_locked(job_id);
  changed_.wait_for(lock, timeout, [&] { return finished(job.status.state) || job.status.version > seen_version; });
  return job.status;
}

JobStatus Toolbox::wait_finished(const std::string& job_id) const {
  std::unique_lock lock(mutex_);
  Job& job = job_locked(job_id);
  changed_.wait(lock, [&] { return finished(job.status.state); });
  return job.status;
}

std::filesystem::path Toolbox::job_dir(const std::string& job_id) const { return opts_.data_dir / "jobs" / job_id; }

void Toolbox::log_locked(Job& job, const std::string& level, const std::string& category, const std::string& message) {
  LogEntry e{util::now_iso8601(), level, category, message};
  util::append_line(job_dir(job.status.job_id) / "logs.jsonl", to_json(e).dump());
  job.logs.push_back(std::move(e));
  ++job.status.version;
  changed_.notify_all();
}

void Toolbox::set_state_locked(Job& job, JobState state) {
  job.status.state = state;
  ++job.status.version;
  persist_status_locked(job);
  changed_.notify_all();
}

void Toolbox::persist_status_locked(const Job& job) const {
  util::write_file_atomic(job_dir(job.status.job_id) / "job.json", to_json(job.status).dump(2));
}

void Toolbox::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      // Pending jobs are drained before shutdown completes.
      if (queue_.empty()) return;
      id = queue_.front();
      queue_.pop_front();
    }
    run_job(id);
  }
}

void Toolbox::run_job(const std::string& job_id) {
  JobStatus snapshot;
  econ::SimConfig config;
  {
    std::lock_guard lock(mutex_);
    Job& job = job_locked(job_id);
    set_state_locked(job, JobState::running);
    log_locked(job, "info", "lifecycle", "running");
    snapshot = job.status;
    config = job.config;
  }
  try {
    if (opts_.fault_injector) opts_.fault_injector(snapshot);
    auto provider = opts_.provider_factory ? opts_.provider_factory() : std::make_unique<behavior::RuleBasedProvider>();
    auto result = econ::run(config, config.seed, config.horizon, *provider, [&](std::int64_t done, std::int64_t total) {
      std::lock_guard lock(mutex_);
      Job& job = job_locked(job_id);
      job.status.progress_done = done;
      job.status.progress_total = total;
      ++job.status.version;
      changed_.notify_all();
    });

    json artifact;
    artifact["job_id"] = job_id;
    artifact["config_hash"] = snapshot.config_hash;
    artifact["seed"] = config.seed;
    artifact["horizon"] = config.horizon;
    artifact["config"] = econ::to_json(config);
    artifact["metrics"] = econ::metric_series_json(result.series);
    json ledger = json::array();
    for (const auto& e : result.final_state.ledger) ledger.push_back(econ::to_json(e));
    artifact["ledger"] = std::move(ledger);
    artifact["minted_interest"] = result.final_state.bank.minted_interest_cumulative;
    util::write_file_atomic(job_dir(job_id) / "result.json", artifact.dump());

    std::lock_guard lock(mutex_);
    Job& job = job_locked(job_id);
    for (const auto& note : result.notes) log_locked(job, note.level, note.category, note.message);
    log_locked(job, "info", "lifecycle", "succeeded; result.json written");
    set_state_locked(job, JobState::succeeded);
  } catch (const std::exception& e) {
    std::lock_guard lock(mutex_);
    Job& job = job_locked(job_id);
    job.status.error_category = ErrorCategory::execution_failure;
    job.status.error = e.what();
    log_locked(job, "error", "execution_failure", e.what());
    set_state_locked(job, JobState::failed);
  }
}

namespace {

json error_response(const json& id, ErrorCategory category, const std::string& message,
                    const std::vector<std::string>& fields = {}) {
  json err = {{"category", to_string(category)}, {"message", message}};
  if (!fields.empty()) err["fields"] = fields;
  return {{"id", id}, {"status", "error"}, {"error", err}};
}

const json& args_object(const json& args) {
  if (!args.is_object()) throw ValidationError("args must be an object", {"args"});
  return args;
}

std::string string_arg(const json& args, const char* key) {
  auto it = args.find(key);
  if (it == args.end() || !it->is_string()) throw ValidationError(std::string("missing string argument: ") + key, {key});
  return it->get<std::string>();
}

}  // namespace

json Toolbox::handle(const json& request) {
  if (!request.is_object()) return error_response(nullptr, ErrorCategory::invalid_args, "request must be a JSON object");
  const json id = request.contains("id") ? request["id"] : json(nullptr);
  if (!id.is_string() && !id.is_number_integer()) {
    return error_response(nullptr, ErrorCategory::invalid_args, "request id must be a string");
  }
  auto tool_it = request.find("tool");
  if (tool_it == request.end() || !tool_it->is_string()) {
    return error_response(id, ErrorCategory::invalid_args, "request has no tool name");
  }
  const std::string tool = tool_it->get<std::string>();
  const json args = request.value("args", json::object());
  try {
    json payload;
    if (tool == "inspect_parameters") {
      reject_unknown_args(args_object(args), {});
      payload = inspect_parameters();
    } else if (tool == "init_environment") {
      payload = init_environment(args_object(args));
    } else if (tool == "configure_experiment") {
      payload = configure_experiment(args_object(args));
    } else if (tool == "start_job") {
      reject_unknown_args(args_object(args), {"config_hash", "seed", "horizon"});
      std::optional<std::uint64_t> seed;
      std::optional<int> horizon;
      if (args.contains("seed")) {
        const auto& v = args["seed"];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
          throw ValidationError("seed must be a non-negative integer", {"seed"});
        }
        seed = v.get<std::uint64_t>();
      }
      if (args.contains("horizon")) {
        if (!args["horizon"].is_number_integer()) throw ValidationError("horizon must be an integer", {"horizon"});
        horizon = args["horizon"].get<int>();
      }
      const auto job_id = start_job(string_arg(args, "config_hash"), seed, horizon);
      payload = {{"job_id", job_id}, {"state", to_string(poll_status(job_id).state)}};
    } else if (tool == "poll_status") {
      reject_unknown_args(args_object(args), {"job_id"});
      payload = to_json(poll_status(string_arg(args, "job_id")));
    } else if (tool == "collect_logs") {
      reject_unknown_args(args_object(args), {"job_id"});
      const auto job_id = string_arg(args, "job_id");
      json entries = json::array();
      for (const auto& e : collect_logs(job_id)) entries.push_back(to_json(e));
      payload = {{"job_id", job_id}, {"entries", entries}};
    } else if (tool == "export_results") {
      reject_unknown_args(args_object(args), {"job_id"});
      payload = export_results(string_arg(args, "job_id"));
    } else {
      return error_response(id, ErrorCategory::unknown_tool, "unknown tool: " + tool);
    }
    return {{"id", id}, {"status", "ok"}, {"payload", std::move(payload)}};
  } catch (const ToolError& e) {
    return error_response(id, e.category(), e.what());
  } catch (const ValidationError& e) {
    return error_response(id, ErrorCategory::invalid_args, e.what(), e.fields());
  } catch (const std::exception& e) {
    return error_response(id, ErrorCategory::execution_failure, e.what());
  }
}

std::string Toolbox::handle_line(const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return error_response(nullptr, ErrorCategory::invalid_args, std::string("malformed request: ") + e.what()).dump();
  }
  return handle(request).dump();
}

BindingCheck verify_binding(const std::filesystem::path& dir) {
  BindingCheck check;
  check.embedded_hash = json::parse(util::read_file(dir / "result.json")).at("config_hash").get<std::string>();
  check.recomputed_hash = util::sha256_hex(canonical_json(json::parse(util::read_file(dir / "config.json"))));
  check.ok = check.embedded_hash == check.recomputed_hash;
  return check;
}

void serve_stdio(Toolbox& toolbox, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    out << toolbox.handle_line(line) << '\n' << std::flush;
  }
}

}  // namespace econlab::toolbox
