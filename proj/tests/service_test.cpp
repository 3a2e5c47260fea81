#include <gtest/gtest.h>

#include <httplib.h>

#include <thread>

#include "econlab/knowledge/embedding.hpp"
#include "econlab/orchestrator/workflow.hpp"
#include "econlab/service/server.hpp"

using namespace econlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kReply =
    "STATEMENT=Innovation support raises household consumption\n"
    "LEVER=innovation_support:false:true\n"
    "METRIC=total_consumption:increase\n"
    "METRIC=avg_income:increase\n";

// A live server on a free port with its own data directory.
struct Live {
  fs::path dir;
  std::unique_ptr<toolbox::Toolbox> tb;
  std::shared_ptr<knowledge::Index> index;
  std::unique_ptr<orchestrator::Workflow> wf;
  std::unique_ptr<service::Server> server;
  std::thread thread;
  int port = 0;

  explicit Live(const std::string& name, std::vector<std::string> replies = {kReply}) {
    dir = fs::temp_directory_path() / ("econlab_service_" + name);
    fs::remove_all(dir);
    toolbox::ToolboxOptions to;
    to.data_dir = dir;
    tb = std::make_unique<toolbox::Toolbox>(to);
    index = std::make_shared<knowledge::Index>(std::make_shared<knowledge::HashEmbedder>());
    index->ingest({{"d1", "Innovation grants", "Research Policy", 2019, "Innovation support raises productivity.", "Grants."}});
    orchestrator::WorkflowOptions wo;
    wo.data_dir = dir;
    wo.index = index;
    wo.provider = std::make_shared<behavior::ScriptedProvider>(std::move(replies));
    wo.toolbox = tb.get();
    wf = std::make_unique<orchestrator::Workflow>(wo);
    server = std::make_unique<service::Server>(service::ServiceDeps{wf.get(), tb.get(), index});
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->listen(); });
  }
  ~Live() {
    server->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60);
    return c;
  }
  std::pair<int, json> post(const std::string& path, const json& body = json::object()) const {
    auto r = client().Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r) << path;
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, json> get(const std::string& path) const {
    auto r = client().Get(path);
    EXPECT_TRUE(r) << path;
    return {r->status, json::parse(r->body)};
  }
};

}  // namespace

TEST(Service, HealthAndRegistry) {
  Live live("health");
  auto [status, body] = live.get("/health");
  EXPECT_EQ(status, 200);
  EXPECT_EQ(body["status"], "ok");
  auto [s2, reg] = live.get("/registry");
  EXPECT_EQ(s2, 200);
  EXPECT_EQ(reg["levers"].size(), econ::default_registry().levers().size());
}

TEST(Service, GatedSessionThroughEndpoints) {
  Live live("flow");
  auto [s, created] = live.post("/sessions");
  ASSERT_EQ(s, 201);
  const std::string base = "/sessions/" + created["session_id"].get<std::string>();

  // Execution is refused until the design has been confirmed.
  EXPECT_EQ(live.post(base + "/execute").first, 409);
  EXPECT_EQ(live.post(base + "/confirm-design").first, 409);

  auto [si, idea] = live.post(base + "/intuition", {{"text", "innovation support and consumption"}});
  ASSERT_EQ(si, 200) << idea.dump();
  EXPECT_EQ(idea["idea"]["outcome"], "hypothesis");
  EXPECT_EQ(live.post(base + "/execute").first, 409);
  EXPECT_EQ(live.post(base + "/confirm-hypothesis", {{"horizon", 6}}).second["stage"], "design");
  EXPECT_EQ(live.post(base + "/execute").first, 409);
  EXPECT_EQ(live.post(base + "/confirm-design").second["stage"], "execution");
  auto [se, done] = live.post(base + "/execute", {{"request_id", "x1"}});
  ASSERT_EQ(se, 200) << done.dump();
  EXPECT_FALSE(done["report"].is_null());

  // A retried execute with the same request id replays the stored response.
  EXPECT_EQ(live.post(base + "/execute", {{"request_id", "x1"}}).second, done);

  auto [sr, results] = live.get(base + "/results");
  EXPECT_EQ(sr, 200);
  EXPECT_EQ(results["bundle"]["runs"].size(), 6u);
  auto [sm, mem] = live.get(base + "/memory");
  EXPECT_EQ(sm, 200);
  EXPECT_GE(mem["records"].size(), 10u);

  const std::string job = results["bundle"]["runs"][0]["job_id"];
  auto [sj, status] = live.get("/jobs/" + job);
  EXPECT_EQ(sj, 200);
  EXPECT_EQ(status["state"], "succeeded");
  EXPECT_FALSE(status["logs"].empty());
}

TEST(Service, ErrorsAreJson) {
  Live live("errors");
  auto [s404, b404] = live.get("/sessions/nope");
  EXPECT_EQ(s404, 404);
  EXPECT_EQ(b404["error"]["category"], "not_found");
  EXPECT_EQ(live.get("/jobs/job-999999").first, 404);

  const std::string sid = live.post("/sessions").second["session_id"];
  auto r = live.client().Post("/sessions/" + sid + "/intuition", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(json::parse(r->body)["error"]["category"], "invalid_args");
  EXPECT_EQ(live.post("/sessions/" + sid + "/intuition", {{"text", 3}}).first, 400);
  EXPECT_EQ(live.post("/sessions/" + sid + "/iterate", {{"accept", "yes"}}).first, 400);
}

TEST(Service, CreateSessionIsIdempotent) {
  Live live("idem");
  const auto a = live.post("/sessions", {{"request_id", "abc"}});
  const auto b = live.post("/sessions", {{"request_id", "abc"}});
  EXPECT_EQ(a.second, b.second);
  EXPECT_EQ(live.get("/sessions").second["sessions"].size(), 1u);
}

TEST(Service, JobEventStreamEnds) {
  Live live("sse");
  const auto configured = live.post("/toolbox", {{"id", "1"}, {"tool", "init_environment"}, {"args", json::object()}});
  ASSERT_EQ(configured.second["status"], "ok") << configured.second.dump();
  const auto started = live.post(
      "/toolbox", {{"id", "2"}, {"tool", "start_job"}, {"args", {{"config_hash", configured.second["payload"]["config_hash"]}}}});
  ASSERT_EQ(started.second["status"], "ok") << started.second.dump();
  const std::string job = started.second["payload"]["job_id"];

  std::string stream;
  auto r = live.client().Get("/jobs/" + job + "/events", [&](const char* data, std::size_t n) {
    stream.append(data, n);
    return true;
  });
  ASSERT_TRUE(r);
  EXPECT_EQ(r->get_header_value("Content-Type"), "text/event-stream");
  EXPECT_NE(stream.find("event: status"), std::string::npos);
  EXPECT_NE(stream.find("event: end\ndata: {\"state\":\"succeeded\"}"), std::string::npos);
}

TEST(Service, OccupiedPortIsNamed) {
  Live live("port");
  Live other("port2");
  try {
    other.server->bind("127.0.0.1", live.port);
    FAIL() << "bind succeeded on an occupied port";
  } catch (const service::ServiceError& e) {
    EXPECT_NE(std::string(e.what()).find("port " + std::to_string(live.port)), std::string::npos) << e.what();
  }
}
