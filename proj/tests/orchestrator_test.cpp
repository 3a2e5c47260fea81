#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "econlab/error.hpp"
#include "econlab/knowledge/embedding.hpp"
#include "econlab/orchestrator/pipeline.hpp"

using namespace econlab;
using namespace econlab::orchestrator;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("econlab_orch_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

std::vector<knowledge::Document> corpus() {
  return {
      {"d1", "Public R&D subsidies and firm productivity", "Research Policy", 2019,
       "Government support for innovation raises firm productivity and lowers unit costs.",
       "We study subsidy programs aimed at process innovation in manufacturing."},
      {"d2", "Household consumption and income growth", "Journal of Economics", 2021,
       "Household consumption tracks permanent income; productivity gains pass through to wages.",
       "Consumption responds to expected income rather than transitory shocks."},
      {"d3", "Income taxation and labor supply", "Public Finance Review", 2015,
       "Higher income tax rates reduce disposable income and consumption.",
       "We estimate elasticities from reforms."},
  };
}

// Everything one session needs, wired the way the service wires it.
struct Rig {
  std::filesystem::path dir;
  knowledge::Index index{std::make_shared<knowledge::HashEmbedder>()};
  knowledge::ManifestStore manifests;
  std::unique_ptr<toolbox::Toolbox> tb;
  memory::MemoryStore memory;

  explicit Rig(const std::string& name, std::function<void(const toolbox::JobStatus&)> fault = {})
      : dir(fresh_dir(name)),
        manifests(dir),
        tb(std::make_unique<toolbox::Toolbox>(toolbox::ToolboxOptions{dir, 3, &econ::default_registry(), {}, fault})),
        memory(dir, resolver()) {
    index.ingest(corpus());
  }

  memory::RefResolver resolver() {
    return [this](const std::string& session, const memory::Ref& ref) {
      switch (ref.kind) {
        case memory::RefKind::manifest: return manifests.find(session, ref.id).has_value();
        case memory::RefKind::config_hash: return tb->has_config(ref.id);
        case memory::RefKind::job_id: return tb->has_job(ref.id);
      }
      return false;
    };
  }

  IdeaResult idea(const std::string& reply, const std::string& intuition = "does government support for innovation increase household consumption") {
    behavior::ScriptedProvider provider({reply});
    return develop_idea({index, manifests, memory, econ::default_registry(), provider}, "s1", intuition);
  }
};

const std::string kInnovationReply =
    "STATEMENT=Innovation support raises household consumption\n"
    "LEVER=innovation_support:false:true\n"
    "METRIC=total_consumption:increase\n"
    "MECHANISM=subsidy raises productivity\n"
    "MECHANISM=productivity raises wages\n";

Hypothesis innovation_hypothesis() {
  Hypothesis h;
  h.statement = "innovation support raises consumption";
  h.independent_levers = {{"innovation_support", false, true}};
  h.dependent_metrics = {{"total_consumption", Direction::increase}};
  h.evidence = {{"m1", "d1", 0, 0.5}};
  return h;
}

ExperimentDesign two_group_design(econ::LeverValues control, econ::LeverValues treatment, std::set<std::string> declared) {
  ExperimentDesign d;
  d.groups = {{"control", std::move(control)}, {"treatment", std::move(treatment)}};
  d.declared_interventions = std::move(declared);
  return d;
}

}  // namespace

TEST(IdeaReply, Grammar) {
  const auto d = parse_idea_reply(" STATEMENT = x \nnoise\nLEVER=income_tax_rate:0.2:0.25\nLEVER=innovation_support\n"
                                  "METRIC=avg_income:decrease\nMECHANISM=a\nMECHANISM=b\n");
  EXPECT_TRUE(d.recognized);
  EXPECT_EQ(d.statement, "x");
  ASSERT_EQ(d.levers.size(), 2u);
  EXPECT_EQ(d.levers[0].name, "income_tax_rate");
  EXPECT_DOUBLE_EQ(d.levers[0].control->get<double>(), 0.2);
  EXPECT_FALSE(d.levers[1].control.has_value());
  ASSERT_EQ(d.metrics.size(), 1u);
  EXPECT_EQ(d.metrics[0].direction, "decrease");
  EXPECT_EQ(d.mechanism, (std::vector<std::string>{"a", "b"}));
  EXPECT_FALSE(parse_idea_reply("I think consumption goes up.").recognized);
}

TEST(IdeaReply, BareBooleanLeverNegatesDefault) {
  const auto out = check_feasibility(parse_idea_reply("LEVER=innovation_support\nMETRIC=avg_wealth:increase"), "",
                                     econ::default_registry());
  ASSERT_TRUE(std::holds_alternative<Hypothesis>(out));
  const auto& l = std::get<Hypothesis>(out).independent_levers.at(0);
  EXPECT_EQ(l.control, false);
  EXPECT_EQ(l.treatment, true);
  EXPECT_FALSE(std::get<Hypothesis>(out).statement.empty());
}

TEST(DevelopIdea, InnovationExample) {
  Rig rig("idea_ok");
  const auto r = rig.idea(kInnovationReply);
  ASSERT_TRUE(r.feasible());
  const auto& h = std::get<Hypothesis>(r.outcome);
  ASSERT_EQ(h.dependent_metrics.size(), 1u);
  EXPECT_EQ(h.dependent_metrics[0].name, "total_consumption");
  EXPECT_EQ(h.dependent_metrics[0].direction, Direction::increase);
  EXPECT_EQ(h.independent_levers.at(0).name, "innovation_support");
  EXPECT_EQ(h.mechanism_chain.size(), 2u);
  EXPECT_FALSE(h.evidence.empty());
  for (const auto& e : h.evidence) EXPECT_EQ(e.manifest_id, r.manifest_id);
  EXPECT_EQ(r.manifest_id, "m1");

  const auto recs = rig.memory.query("s1");
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].kind, memory::RecordKind::theoretical_context);
  ASSERT_EQ(recs[0].refs.size(), 1u);
  EXPECT_EQ(recs[0].refs[0].id, "m1");
  EXPECT_EQ(*recs[0].field("outcome"), "hypothesis");
}

TEST(DevelopIdea, PromptListsNamesAndEvidence) {
  Rig rig("prompt");
  behavior::ScriptedProvider provider({kInnovationReply});
  develop_idea({rig.index, rig.manifests, rig.memory, econ::default_registry(), provider}, "s1", "innovation support");
  const auto prompt = provider.prompts().at(0);
  for (const auto& l : econ::default_registry().levers()) EXPECT_NE(prompt.find("- " + l.name + " ("), std::string::npos);
  for (const auto& m : econ::default_registry().metrics()) EXPECT_NE(prompt.find("- " + m.name + " ("), std::string::npos);
  EXPECT_NE(prompt.find("Intuition: innovation support"), std::string::npos);
  EXPECT_NE(prompt.find("[d1#"), std::string::npos);
}

TEST(DevelopIdea, UnknownLeverIsMissingVariable) {
  Rig rig("idea_carbon");
  const auto r = rig.idea("LEVER=carbon_tariff:0:0.1\nMETRIC=total_consumption:decrease");
  ASSERT_FALSE(r.feasible());
  const auto& d = std::get<FeasibilityDiagnosis>(r.outcome);
  ASSERT_EQ(d.violations.size(), 1u);
  EXPECT_EQ(d.violations[0].kind, ViolationKind::missing_variable);
  EXPECT_EQ(d.violations[0].subject, "carbon_tariff");
  EXPECT_NE(d.violations[0].detail.find("carbon_tariff"), std::string::npos);
  EXPECT_EQ(*rig.memory.query("s1").at(0).field("outcome"), "diagnosis");
}

TEST(DevelopIdea, ZeroLeversGivesLabeledProxy) {
  Rig rig("idea_none");
  const auto r = rig.idea("STATEMENT=support helps\nMETRIC=total_consumption:increase");
  ASSERT_FALSE(r.feasible());
  const auto& d = std::get<FeasibilityDiagnosis>(r.outcome);
  ASSERT_EQ(d.violations.size(), 1u);
  EXPECT_EQ(d.violations[0].kind, ViolationKind::unsupported_intervention);
  ASSERT_TRUE(d.proxy_suggestion.has_value());
  EXPECT_EQ(d.proxy_suggestion->rfind(kProxyLabel, 0), 0u);
  // The intuition talks about innovation support, so that is the nearest lever.
  EXPECT_NE(d.proxy_suggestion->find("innovation_support"), std::string::npos);
}

TEST(DevelopIdea, ProviderFailureAfterRetries) {
  Rig rig("idea_fail");
  behavior::ScriptedProvider provider({"no grammar here", "still nothing"});
  const auto r = develop_idea({rig.index, rig.manifests, rig.memory, econ::default_registry(), provider}, "s1", "x");
  ASSERT_FALSE(r.feasible());
  const auto& v = std::get<FeasibilityDiagnosis>(r.outcome).violations.at(0);
  EXPECT_EQ(v.kind, ViolationKind::inconsistent_assumption);
  EXPECT_EQ(v.subject, "provider");
  EXPECT_NE(v.detail.find("exhausted"), std::string::npos);
  EXPECT_EQ(provider.prompts().size(), 3u);
}

TEST(DevelopIdea, EmptyIndexAndEmptyIntuition) {
  auto dir = fresh_dir("idea_empty");
  knowledge::Index index(std::make_shared<knowledge::HashEmbedder>());
  knowledge::ManifestStore manifests(dir);
  memory::MemoryStore mem(dir, [](const std::string&, const memory::Ref&) { return true; });
  behavior::ScriptedProvider provider({kInnovationReply});
  IdeaServices s{index, manifests, mem, econ::default_registry(), provider};
  EXPECT_THROW(develop_idea(s, "s1", "anything"), StateError);
  EXPECT_THROW(develop_idea(s, "s1", "  "), ValidationError);
}

TEST(Feasibility, BoundaryCases) {
  const auto& reg = econ::default_registry();
  auto kinds = [&](const std::string& reply) {
    std::vector<std::pair<ViolationKind, std::string>> out;
    const auto r = check_feasibility(parse_idea_reply(reply), "", reg);
    if (const auto* d = std::get_if<FeasibilityDiagnosis>(&r))
      for (const auto& v : d->violations) out.emplace_back(v.kind, v.subject);
    return out;
  };
  using P = std::pair<ViolationKind, std::string>;
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:1.5\nMETRIC=avg_income:increase"),
            (std::vector<P>{{ViolationKind::unsupported_intervention, "income_tax_rate"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:0.2\nMETRIC=avg_income:increase"),
            (std::vector<P>{{ViolationKind::unsupported_intervention, "income_tax_rate"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:0.3\nMETRIC=happiness:increase"),
            (std::vector<P>{{ViolationKind::missing_variable, "happiness"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:0.3\nMETRIC=avg_income:sideways"),
            (std::vector<P>{{ViolationKind::inconsistent_assumption, "avg_income"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:0.3\nMETRIC=avg_income:increase\nMETRIC=avg_income:decrease"),
            (std::vector<P>{{ViolationKind::inconsistent_assumption, "avg_income"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2:0.3"), (std::vector<P>{{ViolationKind::missing_variable, "dependent_metrics"}}));
  EXPECT_EQ(kinds("LEVER=income_tax_rate:0.2\nMETRIC=avg_income:increase"),
            (std::vector<P>{{ViolationKind::unsupported_intervention, "income_tax_rate"}}));
  EXPECT_TRUE(kinds("LEVER=income_tax_rate:0.2:0.3\nMETRIC=avg_income:increase").empty());
}

// Whatever the provider says, a hypothesis only ever holds registry names and legal values.
TEST(Feasibility, AdversarialRepliesStayInsideBoundary) {
  const auto& reg = econ::default_registry();
  std::vector<std::string> lever_names{"carbon_tariff", "", "INNOVATION_SUPPORT", "income_tax_rate ", "x:y"};
  for (const auto& l : reg.levers()) lever_names.push_back(l.name);
  std::vector<std::string> metric_names{"gdp", "Total_Consumption", ""};
  for (const auto& m : reg.metrics()) metric_names.push_back(m.name);
  const std::vector<std::string> values{"0", "1", "0.1", "-1", "true", "false", "1e9", "nan", "abc", "", "0.9999", "500"};
  const std::vector<std::string> dirs{"increase", "decrease", "up", ""};
  std::mt19937_64 rng(7);
  auto pick = [&](const auto& v) { return v[rng() % v.size()]; };
  int feasible = 0;
  for (int i = 0; i < 2000; ++i) {
    std::string reply;
    for (int n = rng() % 3; n > 0; --n) reply += "LEVER=" + pick(lever_names) + ":" + pick(values) + ":" + pick(values) + "\n";
    for (int n = rng() % 3; n > 0; --n) reply += "METRIC=" + pick(metric_names) + ":" + pick(dirs) + "\n";
    const auto r = check_feasibility(parse_idea_reply(reply), "x", reg);
    if (const auto* h = std::get_if<Hypothesis>(&r)) {
      ++feasible;
      ASSERT_FALSE(h->independent_levers.empty());
      ASSERT_FALSE(h->dependent_metrics.empty());
      for (const auto& l : h->independent_levers) {
        const auto* spec = reg.find_lever(l.name);
        ASSERT_NE(spec, nullptr) << reply;
        EXPECT_FALSE(reg.check_value(*spec, l.control).has_value()) << reply;
        EXPECT_FALSE(reg.check_value(*spec, l.treatment).has_value()) << reply;
        EXPECT_NE(l.control, l.treatment);
      }
      for (const auto& m : h->dependent_metrics) ASSERT_TRUE(reg.has_metric(m.name)) << reply;
    } else {
      const auto& d = std::get<FeasibilityDiagnosis>(r);
      ASSERT_FALSE(d.violations.empty());
      if (d.proxy_suggestion) EXPECT_EQ(d.proxy_suggestion->rfind(kProxyLabel, 0), 0u);
    }
  }
  EXPECT_GT(feasible, 0);
}

TEST(MinimalChange, Examples) {
  econ::LeverValues c{{"income_tax_rate", 0.2}, {"innovation_support", false}};
  econ::LeverValues t{{"income_tax_rate", 0.2}, {"innovation_support", true}};
  EXPECT_TRUE(validate_minimal_change(two_group_design(c, t, {"innovation_support"})).empty());

  auto extra = t;
  extra["income_tax_rate"] = 0.25;
  auto v = validate_minimal_change(two_group_design(c, extra, {"innovation_support"}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "extra undeclared change: income_tax_rate");

  v = validate_minimal_change(two_group_design(c, t, {"innovation_support", "income_tax_rate"}));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].message, "declared but unchanged: income_tax_rate");
  EXPECT_EQ(v[0].group, "treatment");

  ExperimentDesign lone;
  lone.groups = {{"control", c}};
  EXPECT_EQ(validate_minimal_change(lone).size(), 1u);
}

// The validator against a set-difference oracle over random perturbations.
TEST(MinimalChange, AgreesWithOracle) {
  const auto& reg = econ::default_registry();
  const auto base = reg.defaults();
  std::vector<std::string> names;
  for (const auto& [k, v] : base) names.push_back(k);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto treat = base;
    std::set<std::string> changed, declared;
    for (const auto& n : names) {
      if (rng() % 4 == 0) {
        const auto& v = base.at(n);
        treat[n] = v.is_boolean() ? json(!v.get<bool>()) : v.is_number_integer() ? json(v.get<std::int64_t>() + 1)
                                                                                  : json(v.get<double>() + 0.01);
        changed.insert(n);
      }
      if (rng() % 4 == 0) declared.insert(n);
    }
    std::set<std::string> expected;
    for (const auto& n : changed)
      if (!declared.count(n)) expected.insert("extra undeclared change: " + n);
    for (const auto& n : declared)
      if (!changed.count(n)) expected.insert("declared but unchanged: " + n);
    std::set<std::string> got;
    for (const auto& v : validate_minimal_change(two_group_design(base, treat, declared))) got.insert(v.message);
    EXPECT_EQ(got, expected);
  }
}

TEST(Design, InnovationToggle) {
  Rig rig("design");
  const auto d = design_experiment(innovation_hypothesis(), econ::default_registry(), *rig.tb);
  ASSERT_EQ(d.groups.size(), 2u);
  EXPECT_EQ(d.groups[0].name, "control");
  EXPECT_EQ(d.groups[0].levers, econ::default_registry().defaults());
  std::set<std::string> diff;
  for (const auto& [k, v] : d.groups[0].levers)
    if (d.groups[1].levers.at(k) != v) diff.insert(k);
  EXPECT_EQ(diff, std::set<std::string>{"innovation_support"});
  EXPECT_EQ(d.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_EQ(d.replications, 3u);
  EXPECT_EQ(d.config_hashes.size(), 6u);
  std::set<std::string> hashes;
  for (const auto& b : d.config_hashes) {
    EXPECT_TRUE(rig.tb->has_config(b.config_hash));
    EXPECT_EQ(rig.tb->registered_config(b.config_hash)->seed, b.seed);
    hashes.insert(b.config_hash);
  }
  EXPECT_EQ(hashes.size(), 6u);
  EXPECT_EQ(d.metrics, std::vector<std::string>{"total_consumption"});
  // Same hypothesis, same design identity.
  EXPECT_EQ(design_experiment(innovation_hypothesis(), econ::default_registry(), *rig.tb).design_id, d.design_id);
  EXPECT_EQ(design_from_json(to_json(d)).design_id, d.design_id);
}

TEST(Design, TwoLevers) {
  Rig rig("design2");
  auto h = innovation_hypothesis();
  h.independent_levers.push_back({"income_tax_rate", 0.2, 0.1});
  const auto d = design_experiment(h, econ::default_registry(), *rig.tb, {{4, 5}, 6, {}});
  EXPECT_EQ(d.declared_interventions.size(), 2u);
  EXPECT_DOUBLE_EQ(d.groups[0].levers.at("income_tax_rate").get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(d.groups[1].levers.at("income_tax_rate").get<double>(), 0.1);
  for (const auto& [k, v] : d.groups[0].levers)
    if (!d.declared_interventions.count(k)) EXPECT_EQ(v.dump(), d.groups[1].levers.at(k).dump());
  EXPECT_EQ(d.config_hashes.size(), 4u);
  EXPECT_THROW(design_experiment(h, econ::default_registry(), *rig.tb, {{4, 4}, 6, {}}), ValidationError);
}

TEST(Execute, BundleAndTraces) {
  Rig rig("exec");
  auto design = design_experiment(innovation_hypothesis(), econ::default_registry(), *rig.tb, {{1, 2, 3}, 6, {}});
  const auto bundle = execute_design(design, *rig.tb, &rig.memory, "s1", 1);
  EXPECT_TRUE(bundle.complete);
  ASSERT_EQ(bundle.runs.size(), 6u);
  for (const auto& r : bundle.runs) {
    EXPECT_EQ(r.state, "succeeded");
    EXPECT_EQ(r.metrics.at("total_consumption").size(), 6u);
  }
  const auto traces = rig.memory.query("s1", memory::RecordKind::execution_trace);
  ASSERT_EQ(traces.size(), 6u);
  EXPECT_EQ(*traces[0].field("derived_from"), "#1");

  // Replaying the same design reproduces every series byte for byte.
  const auto again = execute_design(design, *rig.tb);
  for (std::size_t i = 0; i < bundle.runs.size(); ++i) {
    EXPECT_NE(again.runs[i].job_id, bundle.runs[i].job_id);
    EXPECT_EQ(again.runs[i].metrics.dump(), bundle.runs[i].metrics.dump());
  }

  // Execution refuses a tampered design.
  design.groups[1].levers["income_tax_rate"] = 0.3;
  EXPECT_THROW(execute_design(design, *rig.tb), ValidationError);
}

TEST(Execute, InjectedFaultGivesPartialBundle) {
  Rig rig("exec_fault", [](const toolbox::JobStatus& s) {
    if (s.job_id == "job-000004") throw std::runtime_error("injected fault");
  });
  const auto design = design_experiment(innovation_hypothesis(), econ::default_registry(), *rig.tb, {{1, 2, 3}, 4, {}});
  const auto bundle = execute_design(design, *rig.tb);
  EXPECT_FALSE(bundle.complete);
  std::vector<RunResult> failed;
  std::copy_if(bundle.runs.begin(), bundle.runs.end(), std::back_inserter(failed),
               [](const RunResult& r) { return r.state == "failed"; });
  ASSERT_EQ(failed.size(), 1u);
  EXPECT_EQ(failed[0].error_category, "execution_failure");
  EXPECT_EQ(to_json(bundle).at("failures").size(), 1u);
  EXPECT_THROW(analyze(bundle, innovation_hypothesis(), design), StateError);
}

namespace {

// A bundle with given per-seed cumulative totals; each series is split over 2 ticks.
ResultBundle synthetic(const std::vector<double>& control, const std::vector<double>& treatment, ExperimentDesign& d,
                       const std::string& metric = "total_consumption") {
  d.design_id = "design-x";
  d.groups = {{"control", {}}, {"treatment", {}}};
  d.metrics = {metric};
  d.seeds.clear();
  ResultBundle b;
  b.complete = true;
  for (std::size_t i = 0; i < control.size(); ++i) {
    d.seeds.push_back(i + 1);
    for (const auto& [g, v] : {std::pair{"control", control[i]}, std::pair{"treatment", treatment[i]}}) {
      RunResult r;
      r.group = g;
      r.seed = i + 1;
      r.state = "succeeded";
      r.metrics = {{metric, {v / 2, v / 2}}, {"avg_wealth", {1.0, 1.0}}};
      b.runs.push_back(r);
    }
  }
  return b;
}

}  // namespace

TEST(Analyze, RelativeDiffAndSupport) {
  ExperimentDesign d;
  const auto b = synthetic({100.0, 99.0, 101.0}, {104.3, 103.0, 105.6}, d);
  const auto r = analyze(b, innovation_hypothesis(), d);
  ASSERT_EQ(r.metrics.size(), 1u);
  const auto& m = r.metrics[0];
  EXPECT_EQ(m.aggregation, "cumulative");
  EXPECT_DOUBLE_EQ(m.control_mean, 100.0);
  EXPECT_NEAR(m.treatment_mean, 104.3, 1e-9);
  EXPECT_NEAR(*m.relative_diff, 0.043, 1e-9);
  EXPECT_TRUE(m.direction_match);
  EXPECT_TRUE(m.sign_consistent_across_seeds);
  EXPECT_EQ(r.verdict, Verdict::supported);
  EXPECT_TRUE(r.next_directions.empty());
  EXPECT_FALSE(next_intuition("i", r).has_value());
  // Only the pre-registered metric is reported, although avg_wealth is in every run.
  EXPECT_EQ(to_json(r).dump().find("avg_wealth"), std::string::npos);
}

TEST(Analyze, MixedSignsAreInsufficient) {
  ExperimentDesign d;
  const auto r = analyze(synthetic({100, 100, 100}, {110, 95, 104}, d), innovation_hypothesis(), d);
  EXPECT_TRUE(r.metrics[0].direction_match);
  EXPECT_FALSE(r.metrics[0].sign_consistent_across_seeds);
  EXPECT_EQ(r.verdict, Verdict::insufficient);
  ASSERT_FALSE(r.next_directions.empty());
  const auto draft = next_intuition("innovation helps", r);
  ASSERT_TRUE(draft.has_value());
  EXPECT_NE(draft->find(r.next_directions.front()), std::string::npos);
}

TEST(Analyze, ConsistentOppositeIsRefuted) {
  ExperimentDesign d;
  const auto r = analyze(synthetic({100, 100, 100}, {90, 95, 99}, d), innovation_hypothesis(), d);
  EXPECT_FALSE(r.metrics[0].direction_match);
  EXPECT_EQ(r.verdict, Verdict::refuted);
}

TEST(Analyze, TwoSeedsNeverSupport) {
  ExperimentDesign d;
  const auto r = analyze(synthetic({100, 100}, {110, 120}, d), innovation_hypothesis(), d);
  EXPECT_EQ(r.verdict, Verdict::insufficient);
  EXPECT_EQ(r.next_directions.front(), "replicate with at least 3 seeds");
}

TEST(Analyze, MissingMetricIsRejected) {
  ExperimentDesign d;
  auto b = synthetic({100, 100, 100}, {110, 120, 130}, d);
  b.runs[3].metrics.erase("total_consumption");
  EXPECT_THROW(analyze(b, innovation_hypothesis(), d), ValidationError);
}

TEST(Analyze, AggregationRules) {
  const json s = {1.0, 2.0, 6.0};
  EXPECT_DOUBLE_EQ(aggregate(s, econ::Aggregation::cumulative), 9.0);
  EXPECT_DOUBLE_EQ(aggregate(s, econ::Aggregation::final), 6.0);
  EXPECT_DOUBLE_EQ(aggregate(s, econ::Aggregation::mean), 3.0);
  EXPECT_THROW(aggregate(json::array(), econ::Aggregation::final), ValidationError);
}

TEST(Provenance, ReachesManifestHypothesisConfigsAndJobs) {
  Rig rig("prov");
  const auto idea = rig.idea(kInnovationReply);
  ASSERT_TRUE(idea.feasible());
  const auto& h = std::get<Hypothesis>(idea.outcome);
  const auto design = design_experiment(h, econ::default_registry(), *rig.tb, {{1, 2, 3}, 4, {}});
  const auto bundle = execute_design(design, *rig.tb, &rig.memory, "s1", idea.record_id);
  const auto report = analyze(bundle, h, design);

  std::vector<std::uint64_t> traces;
  for (const auto& r : rig.memory.query("s1", memory::RecordKind::execution_trace)) traces.push_back(r.record_id);
  memory::MemoryRecord outcome;
  outcome.stage = memory::Stage::analysis;
  outcome.kind = memory::RecordKind::outcome_synthesis;
  outcome.body = {{"verdict", to_string(report.verdict)}, {"derived_from", derived_from_field(traces)}};
  const auto id = rig.memory.append("s1", outcome);

  const auto p = trace_provenance(rig.memory, "s1", id, rig.resolver());
  EXPECT_TRUE(p.unresolved.empty());
  EXPECT_EQ(p.manifests, std::set<std::string>{idea.manifest_id});
  EXPECT_EQ(p.hypothesis_record, idea.record_id);
  EXPECT_EQ(p.config_hashes.size(), 6u);
  EXPECT_EQ(p.job_ids.size(), 6u);
  for (const auto& j : p.job_ids) EXPECT_TRUE(std::filesystem::exists(rig.tb->job_dir(j) / "logs.jsonl"));
}
