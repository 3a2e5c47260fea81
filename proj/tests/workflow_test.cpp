#include <gtest/gtest.h>

#include "econlab/error.hpp"
#include "econlab/knowledge/embedding.hpp"
#include "econlab/orchestrator/idea_provider.hpp"
#include "econlab/orchestrator/workflow.hpp"

using namespace econlab;
using namespace econlab::orchestrator;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("econlab_workflow_" + name);
  fs::remove_all(dir);
  return dir;
}

std::shared_ptr<knowledge::Index> small_index() {
  auto index = std::make_shared<knowledge::Index>(std::make_shared<knowledge::HashEmbedder>());
  index->ingest({{"d1", "Innovation policy and productivity", "Research Policy", 2019,
                  "Government support for innovation raises productivity and wages.", "Subsidies for process innovation."},
                 {"d2", "Consumption and income", "Journal of Economics", 2021,
                  "Household consumption follows income.", "Permanent income and spending."}});
  return index;
}

const std::string kReply =
    "STATEMENT=Innovation support raises household consumption\n"
    "LEVER=innovation_support:false:true\n"
    "METRIC=total_consumption:increase\n"
    "METRIC=avg_income:increase\n"
    "METRIC=avg_wealth:increase\n"
    "MECHANISM=subsidy raises productivity\n";

struct Rig {
  fs::path dir;
  std::unique_ptr<toolbox::Toolbox> tb;
  std::shared_ptr<behavior::ScriptedProvider> provider;
  std::unique_ptr<Workflow> wf;

  Rig(const std::string& name, std::vector<std::string> replies, fs::path existing = {}) {
    dir = existing.empty() ? fresh_dir(name) : existing;
    toolbox::ToolboxOptions to;
    to.data_dir = dir;
    to.workers = 3;
    tb = std::make_unique<toolbox::Toolbox>(to);
    provider = std::make_shared<behavior::ScriptedProvider>(std::move(replies));
    WorkflowOptions wo;
    wo.data_dir = dir;
    wo.index = small_index();
    wo.provider = provider;
    wo.toolbox = tb.get();
    wf = std::make_unique<Workflow>(wo);
  }
};

std::vector<std::string> kinds(const json& memory) {
  std::vector<std::string> out;
  for (const auto& r : memory["records"]) out.push_back(r["kind"]);
  return out;
}

}  // namespace

TEST(Workflow, InnovationSessionEndToEnd) {
  Rig rig("e2e", {kReply});
  const std::string sid = rig.wf->create_session()["session_id"];
  EXPECT_EQ(rig.wf->session(sid)["stage"], "idea");

  const auto idea = rig.wf->submit_intuition(sid, "does government support for innovation increase household consumption");
  ASSERT_EQ(idea["idea"]["outcome"], "hypothesis");
  EXPECT_FALSE(idea["idea"]["evidence"].empty());

  const auto design = rig.wf->confirm_hypothesis(sid);
  EXPECT_EQ(design["stage"], "design");
  EXPECT_EQ(design["design"]["config_hashes"].size(), 6u);
  EXPECT_EQ(rig.wf->confirm_design(sid)["stage"], "execution");

  const auto done = rig.wf->execute(sid);
  ASSERT_FALSE(done["report"].is_null()) << done.dump();
  EXPECT_EQ(done["report"]["verdict"], "supported");
  EXPECT_EQ(done["stage"], "complete");
  for (const auto& m : done["report"]["metrics"]) {
    EXPECT_TRUE(m["direction_match"].get<bool>()) << m.dump();
    EXPECT_TRUE(m["sign_consistent_across_seeds"].get<bool>()) << m.dump();
  }

  const auto mem = rig.wf->memory(sid);
  const std::vector<std::string> expected{"theoretical_context", "experiment_spec", "experiment_spec",
                                          "execution_trace",     "execution_trace", "execution_trace",
                                          "execution_trace",     "execution_trace", "execution_trace",
                                          "outcome_synthesis"};
  EXPECT_EQ(kinds(mem), expected);

  // Every stage transition points at a memory record.
  const auto state = rig.wf->session(sid);
  std::vector<std::string> stages;
  for (const auto& h : state["history"]) {
    stages.push_back(h["to"]);
    EXPECT_GE(h["record_id"].get<std::uint64_t>(), 1u);
  }
  EXPECT_EQ(stages, (std::vector<std::string>{"design", "execution", "analysis", "complete"}));

  const auto p = trace_provenance(rig.wf->memory_store(), sid, state["records"]["outcome"], rig.wf->resolver());
  EXPECT_TRUE(p.unresolved.empty());
  EXPECT_EQ(p.manifests.size(), 1u);
  EXPECT_EQ(p.hypothesis_record, state["records"]["hypothesis"].get<std::uint64_t>());
  EXPECT_EQ(p.config_hashes.size(), 6u);
  EXPECT_EQ(p.job_ids.size(), 6u);
}

TEST(Workflow, StageGatesAndUnknownSession) {
  Rig rig("gates", {kReply});
  const std::string sid = rig.wf->create_session()["session_id"];
  EXPECT_THROW(rig.wf->confirm_hypothesis(sid), StateError);
  EXPECT_THROW(rig.wf->confirm_design(sid), StateError);
  EXPECT_THROW(rig.wf->execute(sid), StateError);
  EXPECT_THROW(rig.wf->iterate(sid, true), StateError);
  EXPECT_THROW(rig.wf->submit_intuition(sid, " "), ValidationError);
  EXPECT_THROW(rig.wf->session("nope"), NotFoundError);
  EXPECT_THROW(rig.wf->submit_intuition("../etc", "x"), NotFoundError);
  // A failed call leaves the session as it was.
  EXPECT_EQ(rig.wf->session(sid)["version"], 1);
}

TEST(Workflow, RequestIdsMakeCallsIdempotent) {
  Rig rig("idem", {kReply});
  const auto a = rig.wf->create_session("req-1");
  EXPECT_EQ(rig.wf->create_session("req-1"), a);
  const std::string sid = a["session_id"];
  const auto first = rig.wf->submit_intuition(sid, "innovation support and consumption", "r-2");
  // The script holds one reply; a second real call would exhaust it.
  const auto again = rig.wf->submit_intuition(sid, "innovation support and consumption", "r-2");
  EXPECT_EQ(first, again);
  EXPECT_EQ(rig.provider->prompts().size(), 1u);
  EXPECT_EQ(rig.wf->memory(sid)["records"].size(), 1u);

  rig.wf->confirm_hypothesis(sid, json::object(), "r-3");
  EXPECT_EQ(rig.wf->confirm_hypothesis(sid, json::object(), "r-3")["stage"], "design");
  EXPECT_EQ(rig.wf->memory(sid)["records"].size(), 2u);
}

TEST(Workflow, InsufficientThenIterate) {
  Rig rig("iterate", {kReply, kReply, kReply});
  const std::string sid = rig.wf->create_session()["session_id"];
  rig.wf->submit_intuition(sid, "innovation support raises consumption");
  rig.wf->confirm_hypothesis(sid, {{"seeds", {1, 2}}, {"horizon", 6}});
  rig.wf->confirm_design(sid);
  const auto r = rig.wf->execute(sid);
  EXPECT_EQ(r["report"]["verdict"], "insufficient");
  EXPECT_EQ(r["stage"], "analysis");
  ASSERT_TRUE(r["draft_intuition"].is_string());
  EXPECT_NE(r["draft_intuition"].get<std::string>().find(r["report"]["next_directions"][0].get<std::string>()),
            std::string::npos);
  // No route from analysis back to execution without going through the idea gate.
  EXPECT_THROW(rig.wf->execute(sid), StateError);

  const auto rejected = rig.wf->iterate(sid, false);
  EXPECT_EQ(rejected["stage"], "idea");
  auto state = rig.wf->session(sid);
  EXPECT_TRUE(state["hypothesis"].is_null());
  EXPECT_EQ(state["rounds"].size(), 1u);
  EXPECT_THROW(rig.wf->confirm_hypothesis(sid), StateError);

  rig.wf->submit_intuition(sid, "innovation support raises consumption");
  rig.wf->confirm_hypothesis(sid, {{"seeds", {1, 2}}, {"horizon", 6}});
  rig.wf->confirm_design(sid);
  rig.wf->execute(sid);
  const auto accepted = rig.wf->iterate(sid, true);
  EXPECT_EQ(accepted["stage"], "idea");
  EXPECT_EQ(accepted["idea"]["outcome"], "hypothesis");
  state = rig.wf->session(sid);
  EXPECT_EQ(state["rounds"].size(), 2u);
  EXPECT_NE(state["intuition"].get<std::string>().find("next direction"), std::string::npos);
}

TEST(Workflow, PartialExecutionStaysAtExecution) {
  auto dir = fresh_dir("partial");
  toolbox::ToolboxOptions to;
  to.data_dir = dir;
  bool fail = true;
  to.fault_injector = [&](const toolbox::JobStatus& s) {
    if (fail && s.job_id == "job-000002") throw std::runtime_error("disk full");
  };
  toolbox::Toolbox tb(to);
  WorkflowOptions wo;
  wo.data_dir = dir;
  wo.index = small_index();
  wo.provider = std::make_shared<behavior::ScriptedProvider>(std::vector<std::string>{kReply});
  wo.toolbox = &tb;
  Workflow wf(wo);
  const std::string sid = wf.create_session()["session_id"];
  wf.submit_intuition(sid, "innovation");
  wf.confirm_hypothesis(sid, {{"horizon", 4}});
  wf.confirm_design(sid);
  const auto r = wf.execute(sid);
  EXPECT_EQ(r["stage"], "execution");
  EXPECT_TRUE(r["report"].is_null());
  EXPECT_EQ(r["bundle"]["failures"].size(), 1u);
  fail = false;
  const auto retry = wf.execute(sid);
  EXPECT_NE(retry["stage"], "execution");
  EXPECT_FALSE(retry["report"].is_null());
}

TEST(Workflow, SessionDirectoryIsSelfContained) {
  Rig rig("copy_src", {kReply});
  const std::string sid = rig.wf->create_session()["session_id"];
  rig.wf->submit_intuition(sid, "innovation support raises consumption");
  rig.wf->confirm_hypothesis(sid, {{"horizon", 4}});
  rig.wf->confirm_design(sid);
  rig.wf->execute(sid);

  const auto target = fresh_dir("copy_dst");
  fs::create_directories(target / "sessions");
  fs::copy(rig.dir / "sessions" / sid, target / "sessions" / sid, fs::copy_options::recursive);
  Rig fresh("unused", {}, target);
  EXPECT_EQ(fresh.wf->session(sid), rig.wf->session(sid));
  EXPECT_EQ(fresh.wf->memory(sid), rig.wf->memory(sid));
  EXPECT_EQ(fresh.wf->results(sid), rig.wf->results(sid));
  EXPECT_EQ(fresh.wf->list_sessions(), std::vector<std::string>{sid});
}

TEST(KeywordProvider, MapsIntuitionToGrammar) {
  KeywordIdeaProvider p;
  const auto reply = p.complete("header\nIntuition: Does government support for innovation increase household consumption?\nrest");
  const auto out = check_feasibility(parse_idea_reply(reply), "", econ::default_registry());
  ASSERT_TRUE(std::holds_alternative<Hypothesis>(out)) << reply;
  const auto& h = std::get<Hypothesis>(out);
  EXPECT_EQ(h.independent_levers.at(0).name, "innovation_support");
  EXPECT_EQ(h.dependent_metrics.at(0).name, "total_consumption");
  EXPECT_EQ(h.dependent_metrics.at(0).direction, Direction::increase);

  const auto tax = parse_idea_reply(p.complete("Intuition: a higher income tax lowers consumption\n"));
  EXPECT_EQ(tax.metrics.at(0).direction, "decrease");
  EXPECT_EQ(tax.levers.at(0).raw, "income_tax_rate:0.1:0.2");
  const auto cut = parse_idea_reply(p.complete("Intuition: a tax cut raises household income\n"));
  EXPECT_EQ(cut.levers.at(0).raw, "income_tax_rate:0.1:0.05");
  EXPECT_EQ(cut.metrics.at(0).direction, "increase");
  const auto none = check_feasibility(parse_idea_reply(p.complete("Intuition: weather drives moods\n")), "weather",
                                      econ::default_registry());
  EXPECT_TRUE(std::holds_alternative<FeasibilityDiagnosis>(none));
}
