#include "econlab/cli/app.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "econlab/error.hpp"
#include "econlab/knowledge/embedding.hpp"
#include "econlab/orchestrator/idea_provider.hpp"
#include "econlab/orchestrator/workflow.hpp"
#include "econlab/service/server.hpp"
#include "econlab/util.hpp"

namespace econlab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string data_dir;
  std::string corpus;

  fs::path resolved_data_dir() const {
    if (!data_dir.empty()) return data_dir;
    if (const char* env = std::getenv("ECON_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return "econlab-data";
  }
};

fs::path index_dir(const fs::path& data) { return data / "index"; }

std::shared_ptr<knowledge::Index> build_index(const fs::path& corpus) {
  auto index = std::make_shared<knowledge::Index>(std::make_shared<knowledge::HashEmbedder>());
  index->ingest(knowledge::load_corpus(corpus));
  return index;
}

// The saved index when there is one; otherwise the corpus when given; otherwise empty.
std::shared_ptr<knowledge::Index> open_index(const fs::path& data, const std::string& corpus) {
  auto embedder = std::make_shared<knowledge::HashEmbedder>();
  if (!corpus.empty()) {
    auto index = build_index(corpus);
    index->save(index_dir(data));
    return index;
  }
  if (fs::exists(index_dir(data) / "metadata.json")) return knowledge::Index::load(index_dir(data), embedder);
  return std::make_shared<knowledge::Index>(embedder);
}

std::shared_ptr<behavior::TextProvider> idea_provider(const std::string& replies) {
  std::shared_ptr<behavior::TextProvider> inner;
  if (replies.empty()) {
    inner = std::make_shared<orchestrator::KeywordIdeaProvider>();
  } else {
    if (!fs::exists(replies)) throw ValidationError("replies file not found: " + replies, {"replies"});
    inner = std::make_shared<behavior::ScriptedProvider>(behavior::ScriptedProvider::read_file(replies));
  }
  return std::make_shared<behavior::TimedProvider>(inner, behavior::provider_timeout_from_env());
}

json error_json(const std::string& category, const std::string& message, const std::vector<std::string>& fields = {}) {
  return {{"error", {{"category", category}, {"message", message}, {"fields", fields}}}};
}

int cmd_index(const Common& c, std::ostream& out) {
  if (c.corpus.empty()) throw ValidationError("--corpus is required", {"corpus"});
  const auto data = c.resolved_data_dir();
  auto index = build_index(c.corpus);
  index->save(index_dir(data));
  out << json{{"documents", index->document_count()}, {"chunks", index->size()},
              {"index_dir", index_dir(data).string()}, {"embedder", index->embedder().name()}}
             .dump()
      << "\n";
  return 0;
}

struct SimArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::string out;
};

int cmd_run_sim(const Common& c, const SimArgs& a, std::ostream& out) {
  json raw = json::object();
  if (!a.config.empty()) {
    try {
      raw = json::parse(util::read_file(a.config));
    } catch (const json::parse_error& e) {
      throw ValidationError("config " + a.config + " is not valid JSON: " + e.what(), {"config"});
    }
  }
  auto config = econ::parse_config(raw);
  config.seed = a.seed.value_or(raw.contains("seed") ? config.seed : 1);
  config.horizon = a.horizon.value_or(raw.contains("horizon") ? config.horizon : 12);
  toolbox::ToolboxOptions to;
  to.data_dir = c.resolved_data_dir();
  to.workers = 1;
  toolbox::Toolbox tb(to);
  const auto hash = tb.register_config(config);
  const auto job = tb.start_job(hash);
  const auto status = tb.wait_finished(job);
  if (status.state != toolbox::JobState::succeeded) throw StateError("simulation failed: " + status.error);
  const auto result = tb.job_dir(job) / "result.json";
  if (!a.out.empty()) util::write_file_atomic(a.out, util::read_file(result));
  out << json{{"job_id", job}, {"config_hash", hash}, {"seed", config.seed}, {"horizon", config.horizon},
              {"result", a.out.empty() ? result.string() : a.out}}
             .dump()
      << "\n";
  return 0;
}

struct WorkflowArgs {
  std::string intuition;
  std::string replies;
  bool auto_confirm = false;
  std::vector<std::uint64_t> seeds;
  std::optional<int> horizon;
};

int cmd_workflow(const Common& c, const WorkflowArgs& a, std::ostream& out) {
  const auto data = c.resolved_data_dir();
  auto index = open_index(data, c.corpus);
  if (index->size() == 0) throw StateError("knowledge index is empty; run `econlab index --corpus FILE` or pass --corpus");
  toolbox::ToolboxOptions to;
  to.data_dir = data;
  toolbox::Toolbox tb(to);
  orchestrator::WorkflowOptions wo;
  wo.data_dir = data;
  wo.index = index;
  wo.provider = idea_provider(a.replies);
  wo.toolbox = &tb;
  orchestrator::Workflow wf(wo);

  const std::string sid = wf.create_session()["session_id"];
  const auto idea = wf.submit_intuition(sid, a.intuition);
  json summary = {{"session_id", sid}, {"session_dir", (data / "sessions" / sid).string()}, {"idea", idea["idea"]}};
  if (a.auto_confirm && idea["idea"]["outcome"] == "hypothesis") {
    json body = json::object();
    if (!a.seeds.empty()) body["seeds"] = a.seeds;
    if (a.horizon) body["horizon"] = *a.horizon;
    wf.confirm_hypothesis(sid, body);
    wf.confirm_design(sid);
    const auto done = wf.execute(sid);
    summary["report"] = done.value("report", json());
    if (done.contains("error")) summary["error"] = done["error"];
  }
  const auto state = wf.session(sid);
  summary["stage"] = state["stage"];
  summary["verdict"] = state["report"].is_null() ? json() : state["report"]["verdict"];
  out << summary.dump() << "\n";
  return summary.contains("error") ? 1 : 0;
}

struct ServeArgs {
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string replies;
};

int cmd_serve(const Common& c, const ServeArgs& a, std::ostream& out) {
  const auto data = c.resolved_data_dir();
  std::error_code ec;
  fs::create_directories(data, ec);
  if (ec || !fs::is_directory(data)) throw service::ServiceError("data directory " + data.string() + " is not usable");
  // Signals are taken by a watcher thread so stop() never runs inside a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto index = open_index(data, c.corpus);
  toolbox::ToolboxOptions to;
  to.data_dir = data;
  toolbox::Toolbox tb(to);
  orchestrator::WorkflowOptions wo;
  wo.data_dir = data;
  wo.index = index;
  wo.provider = idea_provider(a.replies);
  wo.toolbox = &tb;
  orchestrator::Workflow wf(wo);
  service::Server server({&wf, &tb, index, &econ::default_registry()});
  const int port = server.bind(a.host, a.port);
  out << json{{"listening", "http://" + a.host + ":" + std::to_string(port)}, {"data_dir", data.string()},
              {"index_chunks", index->size()}}
             .dump()
      << std::endl;
  std::thread watcher([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.listen();
  // listen() may also end on its own; wake the watcher so it can be joined.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Economic policy research workbench"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--data-dir", common.data_dir, "Data directory (default $ECON_DATA_DIR or ./econlab-data)");

  auto* index = app.add_subcommand("index", "Build the knowledge index from a JSON-lines corpus");
  index->add_option("--corpus", common.corpus, "Corpus file")->required();

  SimArgs sim;
  auto* run_sim = app.add_subcommand("run-sim", "Run one simulation and write result.json");
  run_sim->add_option("--config", sim.config, "Experiment config JSON");
  run_sim->add_option("--seed", sim.seed, "Seed (default 1)");
  run_sim->add_option("--horizon", sim.horizon, "Months (default 12)")->check(CLI::PositiveNumber);
  run_sim->add_option("--out", sim.out, "Also copy result.json here");

  WorkflowArgs wfa;
  auto* workflow = app.add_subcommand("workflow", "Drive one research session non-interactively");
  workflow->add_option("--intuition", wfa.intuition, "Research intuition")->required();
  workflow->add_option("--replies", wfa.replies, "Scripted provider replies, one per line");
  workflow->add_option("--corpus", common.corpus, "Corpus to index first");
  workflow->add_flag("--auto-confirm", wfa.auto_confirm, "Confirm hypothesis and design, then execute");
  workflow->add_option("--seed", wfa.seeds, "Seeds for the design (repeatable; default 1 2 3)");
  workflow->add_option("--horizon", wfa.horizon, "Months per run (default 24)")->check(CLI::PositiveNumber);

  ServeArgs sa;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", sa.port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", sa.host, "Interface to bind");
  serve->add_option("--corpus", common.corpus, "Corpus to index at startup");
  serve->add_option("--replies", sa.replies, "Scripted provider replies instead of the keyword provider");

  app.add_subcommand("toolbox", "Serve the simulator tool protocol as NDJSON on stdin/stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << error_json("usage", e.what()).dump() << "\n";
    return 2;
  }

  try {
    if (*index) return cmd_index(common, out);
    if (*run_sim) return cmd_run_sim(common, sim, out);
    if (*workflow) return cmd_workflow(common, wfa, out);
    if (*serve) return cmd_serve(common, sa, out);
    toolbox::ToolboxOptions to;
    to.data_dir = common.resolved_data_dir();
    toolbox::Toolbox tb(to);
    toolbox::serve_stdio(tb, std::cin, out);
    return 0;
  } catch (const ValidationError& e) {
    err << error_json("invalid_args", e.what(), e.fields()).dump() << "\n";
  } catch (const NotFoundError& e) {
    err << error_json("not_found", e.what(), {e.id()}).dump() << "\n";
  } catch (const StateError& e) {
    err << error_json("conflict", e.what()).dump() << "\n";
  } catch (const service::ServiceError& e) {
    err << error_json("startup", e.what()).dump() << "\n";
  } catch (const std::exception& e) {
    err << error_json("internal", e.what()).dump() << "\n";
  }
  return 1;
}

}  // namespace econlab::cli
