#include "econlab/orchestrator/types.hpp"

#include "econlab/error.hpp"

namespace econlab::orchestrator {

std::string to_string(Direction d) { return d == Direction::increase ? "increase" : "decrease"; }

std::string to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::missing_variable: return "missing_variable";
    case ViolationKind::unsupported_intervention: return "unsupported_intervention";
    case ViolationKind::inconsistent_assumption: return "inconsistent_assumption";
  }
  return "unknown";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::supported: return "supported";
    case Verdict::refuted: return "refuted";
    case Verdict::insufficient: return "insufficient";
  }
  return "unknown";
}

namespace {

Direction direction_from(const std::string& s) {
  if (s == "increase") return Direction::increase;
  if (s == "decrease") return Direction::decrease;
  throw ValidationError("unknown direction: " + s, {"expected_direction"});
}

ViolationKind violation_kind_from(const std::string& s) {
  for (auto k : {ViolationKind::missing_variable, ViolationKind::unsupported_intervention,
                 ViolationKind::inconsistent_assumption})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown violation kind: " + s, {"kind"});
}

Verdict verdict_from(const std::string& s) {
  for (auto v : {Verdict::supported, Verdict::refuted, Verdict::insufficient})
    if (to_string(v) == s) return v;
  throw ValidationError("unknown verdict: " + s, {"verdict"});
}

}  // namespace

json to_json(const Hypothesis& h) {
  json levers = json::array();
  for (const auto& l : h.independent_levers) levers.push_back({{"name", l.name}, {"control", l.control}, {"treatment", l.treatment}});
  json metrics = json::array();
  for (const auto& m : h.dependent_metrics) metrics.push_back({{"name", m.name}, {"expected_direction", to_string(m.direction)}});
  json evidence = json::array();
  for (const auto& e : h.evidence) {
    evidence.push_back({{"manifest_id", e.manifest_id}, {"doc_id", e.doc_id}, {"seq", e.seq}, {"score", e.score}});
  }
  return {{"statement", h.statement},
          {"independent_levers", levers},
          {"dependent_metrics", metrics},
          {"mechanism_chain", h.mechanism_chain},
          {"evidence", evidence}};
}

Hypothesis hypothesis_from_json(const json& j) {
  Hypothesis h;
  h.statement = j.at("statement").get<std::string>();
  for (const auto& l : j.at("independent_levers")) h.independent_levers.push_back({l.at("name"), l.at("control"), l.at("treatment")});
  for (const auto& m : j.at("dependent_metrics")) {
    h.dependent_metrics.push_back({m.at("name"), direction_from(m.at("expected_direction").get<std::string>())});
  }
  h.mechanism_chain = j.at("mechanism_chain").get<std::vector<std::string>>();
  for (const auto& e : j.at("evidence")) h.evidence.push_back({e.at("manifest_id"), e.at("doc_id"), e.at("seq"), e.at("score")});
  return h;
}

json to_json(const FeasibilityDiagnosis& d) {
  json v = json::array();
  for (const auto& x : d.violations) v.push_back({{"kind", to_string(x.kind)}, {"subject", x.subject}, {"detail", x.detail}});
  json j = {{"violations", v}};
  j["proxy_suggestion"] = d.proxy_suggestion ? json(*d.proxy_suggestion) : json(nullptr);
  return j;
}

FeasibilityDiagnosis diagnosis_from_json(const json& j) {
  FeasibilityDiagnosis d;
  for (const auto& v : j.at("violations")) {
    d.violations.push_back({violation_kind_from(v.at("kind")), v.at("subject"), v.at("detail")});
  }
  if (j.contains("proxy_suggestion") && j["proxy_suggestion"].is_string()) d.proxy_suggestion = j["proxy_suggestion"];
  return d;
}

json to_json(const ExperimentDesign& d) {
  json groups = json::array();
  for (const auto& g : d.groups) {
    json levers = json::object();
    for (const auto& [k, v] : g.levers) levers[k] = v;
    groups.push_back({{"name", g.name}, {"levers", levers}});
  }
  json hashes = json::array();
  for (const auto& b : d.config_hashes) hashes.push_back({{"group", b.group}, {"seed", b.seed}, {"config_hash", b.config_hash}});
  return {{"design_id", d.design_id},
          {"groups", groups},
          {"control_group", d.groups.empty() ? "" : d.groups.front().name},
          {"declared_interventions", d.declared_interventions},
          {"metrics", d.metrics},
          {"horizon", d.horizon},
          {"seeds", d.seeds},
          {"replications", d.replications},
          {"population",
           {{"n_households", d.population.n_households},
            {"n_firms", d.population.n_firms},
            {"n_goods", d.population.n_goods},
            {"skill_dims", d.population.skill_dims}}},
          {"config_hashes", hashes}};
}

ExperimentDesign design_from_json(const json& j) {
  ExperimentDesign d;
  d.design_id = j.at("design_id");
  for (const auto& g : j.at("groups")) {
    Group group;
    group.name = g.at("name");
    for (const auto& [k, v] : g.at("levers").items()) group.levers[k] = v;
    d.groups.push_back(std::move(group));
  }
  d.declared_interventions = j.at("declared_interventions").get<std::set<std::string>>();
  d.metrics = j.at("metrics").get<std::vector<std::string>>();
  d.horizon = j.at("horizon");
  d.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  d.replications = j.at("replications");
  const auto& p = j.at("population");
  d.population = {p.at("n_households"), p.at("n_firms"), p.at("n_goods"), p.at("skill_dims")};
  for (const auto& b : j.at("config_hashes")) d.config_hashes.push_back({b.at("group"), b.at("seed"), b.at("config_hash")});
  return d;
}

json to_json(const ResultBundle& b) {
  json runs = json::array();
  for (const auto& r : b.runs) {
    json run = {{"group", r.group},       {"seed", r.seed},   {"config_hash", r.config_hash},
                {"job_id", r.job_id},     {"state", r.state}, {"metrics", r.metrics}};
    if (!r.error_category.empty()) run["error"] = {{"category", r.error_category}, {"message", r.error}};
    runs.push_back(std::move(run));
  }
  json failures = json::array();
  for (const auto& r : b.runs) {
    if (!r.error_category.empty()) failures.push_back({{"job_id", r.job_id}, {"category", r.error_category}, {"message", r.error}});
  }
  return {{"design_id", b.design_id}, {"complete", b.complete}, {"runs", runs}, {"failures", failures}};
}

ResultBundle bundle_from_json(const json& j) {
  ResultBundle b;
  b.design_id = j.at("design_id");
  b.complete = j.at("complete");
  for (const auto& r : j.at("runs")) {
    RunResult run;
    run.group = r.at("group");
    run.seed = r.at("seed");
    run.config_hash = r.at("config_hash");
    run.job_id = r.at("job_id");
    run.state = r.at("state");
    run.metrics = r.at("metrics");
    if (r.contains("error")) {
      run.error_category = r["error"].at("category");
      run.error = r["error"].at("message");
    }
    b.runs.push_back(std::move(run));
  }
  return b;
}

json to_json(const AnalysisReport& r) {
  json metrics = json::array();
  for (const auto& m : r.metrics) {
    json seeds = json::array();
    for (const auto& s : m.per_seed) {
      seeds.push_back({{"seed", s.seed}, {"control", s.control}, {"treatment", s.treatment}, {"diff", s.treatment - s.control}});
    }
    metrics.push_back({{"name", m.name},
                       {"aggregation", m.aggregation},
                       {"expected_direction", to_string(m.expected)},
                       {"control_mean", m.control_mean},
                       {"treatment_mean", m.treatment_mean},
                       {"relative_diff", m.relative_diff ? json(*m.relative_diff) : json(nullptr)},
                       {"per_seed", seeds},
                       {"direction_match", m.direction_match},
                       {"sign_consistent_across_seeds", m.sign_consistent_across_seeds}});
  }
  return {{"design_id", r.design_id},
          {"treatment_group", r.treatment_group},
          {"metrics", metrics},
          {"verdict", to_string(r.verdict)},
          {"next_directions", r.next_directions}};
}

AnalysisReport report_from_json(const json& j) {
  AnalysisReport r;
  r.design_id = j.at("design_id");
  r.treatment_group = j.at("treatment_group");
  for (const auto& m : j.at("metrics")) {
    MetricAnalysis a;
    a.name = m.at("name");
    a.aggregation = m.at("aggregation");
    a.expected = direction_from(m.at("expected_direction"));
    a.control_mean = m.at("control_mean");
    a.treatment_mean = m.at("treatment_mean");
    if (!m.at("relative_diff").is_null()) a.relative_diff = m.at("relative_diff").get<double>();
    for (const auto& s : m.at("per_seed")) a.per_seed.push_back({s.at("seed"), s.at("control"), s.at("treatment")});
    a.direction_match = m.at("direction_match");
    a.sign_consistent_across_seeds = m.at("sign_consistent_across_seeds");
    r.metrics.push_back(std::move(a));
  }
  r.verdict = verdict_from(j.at("verdict"));
  r.next_directions = j.at("next_directions").get<std::vector<std::string>>();
  return r;
}

}  // namespace econlab::orchestrator
