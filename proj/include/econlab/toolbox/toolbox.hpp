#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/behavior/decision.hpp"
#include "econlab/econ/config.hpp"

namespace econlab::toolbox {

using nlohmann::json;

/// Sorted keys, shortest round-trip numbers, UTF-8. Stable identity of a config.
std::string canonical_json(const json& value);

/// Hex SHA-256 of the canonical form of a fully resolved config (levers, population, seed, horizon).
std::string config_hash(const econ::SimConfig& config);

enum class JobState { queued, running, succeeded, failed };
std::string to_string(JobState s);
JobState job_state_from_string(const std::string& s);

enum class ErrorCategory { unknown_tool, invalid_args, unknown_job, execution_failure };
std::string to_string(ErrorCategory c);

/// A failed tool call, carried to the wire as {category, message}.
class ToolError : public std::runtime_error {
 public:
  ToolError(ErrorCategory category, const std::string& message) : std::runtime_error(message), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct LogEntry {
  std::string ts;
  std::string level;  // info | warn | error
  std::string category;
  std::string message;
};

json to_json(const LogEntry& e);

struct JobStatus {
  std::string job_id;
  std::string config_hash;
  std::uint64_t seed = 0;
  int horizon = 0;
  JobState state = JobState::queued;
  std::int64_t progress_done = 0;
  std::int64_t progress_total = 0;
  std::optional<ErrorCategory> error_category;
  std::string error;
  std::uint64_t version = 0;  // bumps on every observable change
};

json to_json(const JobStatus& s);

struct ToolboxOptions {
  std::filesystem::path data_dir;
  std::size_t workers = 2;
  const econ::ParameterRegistry* registry = &econ::default_registry();
  /// Builds the decision provider for one job; rule-based when unset.
  std::function<std::unique_ptr<behavior::DecisionProvider>()> provider_factory;
  /// Called on the worker just before a job's simulation starts; throwing fails the job
  /// with execution_failure. Used to inject faults.
  std::function<void(const JobStatus&)> fault_injector;
};

/// Simulator tool server: config registry, FIFO job pool and the seven tool actions.
/// Job artifacts live in <data_dir>/jobs/<job_id>/ (config.json, logs.jsonl, result.json,
/// job.json); registered configs in <data_dir>/configs/<hash>.json.
class Toolbox {
 public:
  explicit Toolbox(ToolboxOptions options);
  ~Toolbox();
  Toolbox(const Toolbox&) = delete;
  Toolbox& operator=(const Toolbox&) = delete;

  json inspect_parameters() const;

  /// Defaults plus optional overrides; returns {config_hash, config}.
  json init_environment(const json& args);
  /// Full experiment config (same schema as the config file); returns {config_hash, config}.
  json configure_experiment(const json& args);

  /// Validates, resolves and stores `config`; returns its hash.
  std::string register_config(const econ::SimConfig& config);
  std::optional<econ::SimConfig> registered_config(const std::string& hash) const;
  bool has_config(const std::string& hash) const;

  /// Non-blocking. `seed` and `horizon` default to the registered config's values and must
  /// match them when given.
  std::string start_job(const std::string& config_hash, std::optional<std::uint64_t> seed = std::nullopt,
                        std::optional<int> horizon = std::nullopt);
  JobStatus poll_status(const std::string& job_id) const;
  std::vector<LogEntry> collect_logs(const std::string& job_id) const;
  json export_results(const std::string& job_id) const;
  bool has_job(const std::string& job_id) const;

  /// Blocks until the job leaves queued/running or its status version exceeds
  /// `seen_version`, or the timeout passes. Returns the latest status.
  JobStatus wait(const std::string& job_id, std::uint64_t seen_version, std::chrono::milliseconds timeout) const;
  JobStatus wait_finished(const std::string& job_id) const;

  /// Dispatches one {id, tool, args} request. Never throws.
  json handle(const json& request);
  /// Parses and dispatches one NDJSON frame; malformed frames get an error with id null.
  std::string handle_line(const std::string& line);

  std::filesystem::path job_dir(const std::string& job_id) const;
  const ToolboxOptions& options() const noexcept { return opts_; }

 private:
  struct Job {
    JobStatus status;
    econ::SimConfig config;
    std::vector<LogEntry> logs;
  };

  Job& job_locked(const std::string& job_id) const;
  void log_locked(Job& job, const std::string& level, const std::string& category, const std::string& message);
  void set_state_locked(Job& job, JobState state);
  void persist_status_locked(const Job& job) const;
  void worker_loop();
  void run_job(const std::string& job_id);
  void load_existing();

  ToolboxOptions opts_;
  mutable std::mutex mutex_;
  mutable std::condition_variable changed_;
  std::condition_variable queue_cv_;
  std::map<std::string, std::string> configs_;  // hash -> canonical config json
  std::map<std::string, std::unique_ptr<Job>> jobs_;
  std::deque<std::string> queue_;
  std::uint64_t next_job_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

/// Recomputes the canonical hash of <job_dir>/config.json and compares it to the
/// config_hash embedded in <job_dir>/result.json.
struct BindingCheck {
  bool ok = false;
  std::string embedded_hash;
  std::string recomputed_hash;
};
BindingCheck verify_binding(const std::filesystem::path& job_dir);

/// Reads NDJSON requests from `in` and writes one response line per request to `out`.
void serve_stdio(Toolbox& toolbox, std::istream& in, std::ostream& out);

}  // namespace econlab::toolbox
