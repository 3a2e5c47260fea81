#include "econlab/orchestrator/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "econlab/econ/config.hpp"
#include "econlab/error.hpp"
#include "econlab/knowledge/embedding.hpp"
#include "econlab/util.hpp"

namespace econlab::orchestrator {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

json parse_value(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true") return true;
  if (s == "false") return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && s.find_first_of(".eE") == std::string::npos) {
    std::int64_t i = 0;
    auto [p, ec] = std::from_chars(b, e, i);
    if (ec == std::errc() && p == e) return i;
  }
  double d = 0.0;
  auto [p, ec] = std::from_chars(b, e, d);
  if (ec == std::errc() && p == e && std::isfinite(d)) return d;
  return s;  // left as text; the range check rejects it with a message
}

std::string names_of_levers(const econ::ParameterRegistry& r) {
  std::string out;
  for (const auto& l : r.levers()) out += (out.empty() ? "" : ", ") + l.name;
  return out;
}

std::string names_of_metrics(const econ::ParameterRegistry& r) {
  std::string out;
  for (const auto& m : r.metrics()) out += (out.empty() ? "" : ", ") + m.name;
  return out;
}

std::string value_text(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

}  // namespace

std::string idea_prompt(const std::string& intuition, const econ::ParameterRegistry& registry,
                        const std::vector<knowledge::RetrievedChunk>& evidence) {
  std::ostringstream p;
  p << "You turn a research intuition into a hypothesis that a simulator can test.\n"
    << "Intuition: " << intuition << "\n\n"
    << "Levers you may change (use these names exactly):\n";
  for (const auto& l : registry.levers()) {
    p << "- " << l.name << " (" << econ::to_string(l.kind) << ", default " << l.default_value.dump() << "): "
      << l.description << "\n";
  }
  p << "\nMetrics you may predict (use these names exactly):\n";
  for (const auto& m : registry.metrics()) {
    p << "- " << m.name << " (" << econ::to_string(m.aggregation) << "): " << m.description << "\n";
  }
  p << "\nLiterature:\n";
  for (const auto& c : evidence) {
    p << "[" << c.hit.doc_id << "#" << c.hit.seq << "] " << c.title << " (" << c.venue << " " << c.year
      << "): " << c.text << "\n";
  }
  p << "\nReply with lines of the form:\n"
    << "STATEMENT=<one-sentence hypothesis>\n"
    << "LEVER=<lever name>:<control value>:<treatment value>\n"
    << "METRIC=<metric name>:<increase|decrease>\n"
    << "MECHANISM=<one causal step> (repeat, in order)\n"
    << "If no lever above can express the intuition, reply with STATEMENT only.\n";
  return p.str();
}

IdeaDraft parse_idea_reply(const std::string& reply) {
  IdeaDraft d;
  std::istringstream in(reply);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "STATEMENT") {
      d.statement = value;
      d.recognized = true;
    } else if (key == "LEVER") {
      d.recognized = true;
      const auto parts = split(value, ':');
      IdeaDraft::Lever lever;
      lever.raw = value;
      lever.name = parts.empty() ? std::string{} : trim(parts[0]);
      if (parts.size() == 3) {
        lever.control = parse_value(parts[1]);
        lever.treatment = parse_value(parts[2]);
      }
      d.levers.push_back(std::move(lever));
    } else if (key == "METRIC") {
      d.recognized = true;
      const auto colon = value.rfind(':');
      IdeaDraft::Metric m;
      m.name = trim(colon == std::string::npos ? value : value.substr(0, colon));
      m.direction = colon == std::string::npos ? std::string{} : trim(value.substr(colon + 1));
      d.metrics.push_back(std::move(m));
    } else if (key == "MECHANISM") {
      d.recognized = true;
      if (!value.empty()) d.mechanism.push_back(value);
    }
  }
  return d;
}

std::string proxy_suggestion(const std::string& text, const econ::ParameterRegistry& registry) {
  auto words = [](const std::string& s) {
    std::set<std::string> out;
    std::string norm = s;
    std::replace(norm.begin(), norm.end(), '_', ' ');
    for (auto& t : knowledge::tokenize(norm))
      if (t.size() >= 3) out.insert(t);
    return out;
  };
  const auto want = words(text);
  const econ::LeverSpec* best = nullptr;
  std::size_t best_score = 0;
  for (const auto& l : registry.levers()) {
    std::size_t score = 0;
    for (const auto& w : words(l.name + " " + l.description)) score += want.count(w);
    if (best == nullptr || score > best_score) {
      best = &l;
      best_score = score;
    }
  }
  std::string out(kProxyLabel);
  if (best == nullptr) return out + " no simulator lever is available";
  return out + " closest supported lever: " + best->name + " (" + best->description +
         "). It stands in for the requested variable and does not measure it directly.";
}

std::variant<Hypothesis, FeasibilityDiagnosis> check_feasibility(const IdeaDraft& draft, const std::string& intuition,
                                                                 const econ::ParameterRegistry& registry) {
  FeasibilityDiagnosis diag;
  auto violate = [&](ViolationKind k, std::string subject, std::string detail) {
    diag.violations.push_back({k, std::move(subject), std::move(detail)});
  };
  Hypothesis h;
  h.statement = draft.statement;
  h.mechanism_chain = draft.mechanism;
  bool unknown_lever = false;
  std::string unknown_names;

  std::map<std::string, std::pair<json, json>> seen_levers;
  for (const auto& l : draft.levers) {
    const std::string subject = l.name.empty() ? l.raw : l.name;
    const econ::LeverSpec* spec = registry.find_lever(l.name);
    if (spec == nullptr) {
      violate(ViolationKind::missing_variable, subject,
              "'" + subject + "' is not a simulator lever (supported: " + names_of_levers(registry) + ")");
      unknown_lever = true;
      unknown_names += " " + subject;
      continue;
    }
    json control, treatment;
    if (l.control && l.treatment) {
      control = *l.control;
      treatment = *l.treatment;
    } else if (spec->kind == econ::ValueKind::boolean && l.raw == l.name) {
      control = spec->default_value;
      treatment = !spec->default_value.get<bool>();
    } else {
      violate(ViolationKind::unsupported_intervention, subject,
              "expected LEVER=" + subject + ":<control>:<treatment>, got '" + l.raw + "'");
      continue;
    }
    bool ok = true;
    for (const json* v : {&control, &treatment}) {
      if (auto err = registry.check_value(*spec, *v)) {
        violate(ViolationKind::unsupported_intervention, subject, *err);
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    control = econ::ParameterRegistry::normalize(*spec, control);
    treatment = econ::ParameterRegistry::normalize(*spec, treatment);
    if (control == treatment) {
      violate(ViolationKind::unsupported_intervention, subject,
              "control and treatment values are both " + value_text(control) + "; nothing would be intervened on");
      continue;
    }
    if (auto it = seen_levers.find(l.name); it != seen_levers.end()) {
      if (it->second != std::make_pair(control, treatment)) {
        violate(ViolationKind::inconsistent_assumption, subject, "lever " + subject + " is given conflicting values");
      }
      continue;
    }
    seen_levers.emplace(l.name, std::make_pair(control, treatment));
    h.independent_levers.push_back({l.name, control, treatment});
  }

  std::map<std::string, std::string> seen_metrics;
  for (const auto& m : draft.metrics) {
    if (!registry.has_metric(m.name)) {
      violate(ViolationKind::missing_variable, m.name,
              "'" + m.name + "' is not an observable metric (supported: " + names_of_metrics(registry) + ")");
      continue;
    }
    if (m.direction != "increase" && m.direction != "decrease") {
      violate(ViolationKind::inconsistent_assumption, m.name,
              "expected direction for " + m.name + " must be increase or decrease, got '" + m.direction + "'");
      continue;
    }
    if (auto it = seen_metrics.find(m.name); it != seen_metrics.end()) {
      if (it->second != m.direction) {
        violate(ViolationKind::inconsistent_assumption, m.name, "metric " + m.name + " is expected to both increase and decrease");
      }
      continue;
    }
    seen_metrics.emplace(m.name, m.direction);
    h.dependent_metrics.push_back({m.name, m.direction == "increase" ? Direction::increase : Direction::decrease});
  }

  if (draft.levers.empty()) {
    violate(ViolationKind::unsupported_intervention, "independent_levers",
            "no simulator lever was proposed that can express the intuition");
  }
  if (draft.metrics.empty()) {
    violate(ViolationKind::missing_variable, "dependent_metrics", "no observable metric was proposed");
  }
  if (!diag.violations.empty()) {
    if (draft.levers.empty() || unknown_lever) diag.proxy_suggestion = proxy_suggestion(intuition + unknown_names, registry);
    return diag;
  }
  if (h.statement.empty()) {
    const auto& l = h.independent_levers.front();
    const auto& m = h.dependent_metrics.front();
    h.statement = "Setting " + l.name + " to " + value_text(l.treatment) + " instead of " + value_text(l.control) +
                  " will " + to_string(m.direction) + " " + m.name;
  }
  return h;
}

IdeaResult develop_idea(IdeaServices s, const std::string& session_id, const std::string& intuition,
                        const IdeaOptions& options) {
  if (trim(intuition).empty()) throw ValidationError("intuition text is empty", {"text"});
  auto retrieval = knowledge::retrieve(s.index, s.manifests, session_id, intuition, options.k, options.filters);
  IdeaResult result;
  result.manifest_id = retrieval.manifest.manifest_id;
  result.evidence = retrieval.chunks;

  const std::string prompt = idea_prompt(intuition, s.registry, retrieval.chunks);
  std::optional<IdeaDraft> draft;
  std::string last_error;
  const int attempts = std::max(1, options.attempts);
  for (int i = 0; i < attempts && !draft; ++i) {
    try {
      auto parsed = parse_idea_reply(s.provider.complete(prompt));
      if (parsed.recognized) {
        draft = std::move(parsed);
      } else {
        last_error = "reply had no STATEMENT, LEVER or METRIC line";
      }
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }

  if (!draft) {
    FeasibilityDiagnosis d;
    d.violations.push_back({ViolationKind::inconsistent_assumption, "provider",
                            "no usable provider reply after " + std::to_string(attempts) + " attempt(s): " + last_error});
    result.outcome = std::move(d);
  } else {
    result.outcome = check_feasibility(*draft, intuition, s.registry);
  }
  if (auto* h = std::get_if<Hypothesis>(&result.outcome)) {
    for (const auto& hit : retrieval.manifest.hits) h->evidence.push_back({result.manifest_id, hit.doc_id, hit.seq, hit.score});
  }

  memory::MemoryRecord rec;
  rec.stage = memory::Stage::idea;
  rec.kind = memory::RecordKind::theoretical_context;
  rec.body.emplace_back("intuition", intuition);
  rec.body.emplace_back("manifest", result.manifest_id);
  if (auto* h = std::get_if<Hypothesis>(&result.outcome)) {
    rec.body.emplace_back("outcome", "hypothesis");
    rec.body.emplace_back("hypothesis", to_json(*h).dump());
    rec.text = h->statement;
  } else {
    const auto& d = std::get<FeasibilityDiagnosis>(result.outcome);
    rec.body.emplace_back("outcome", "diagnosis");
    rec.body.emplace_back("diagnosis", to_json(d).dump());
    for (const auto& v : d.violations) rec.text += (rec.text.empty() ? "" : "\n") + to_string(v.kind) + ": " + v.detail;
  }
  rec.refs.push_back({memory::RefKind::manifest, result.manifest_id});
  result.record_id = s.memory.append(session_id, std::move(rec));
  return result;
}

ExperimentDesign design_experiment(const Hypothesis& hypothesis, const econ::ParameterRegistry& registry,
                                   toolbox::Toolbox& toolbox, const DesignOptions& options) {
  if (hypothesis.independent_levers.empty() || hypothesis.dependent_metrics.empty()) {
    throw ValidationError("hypothesis needs at least one lever and one metric", {"hypothesis"});
  }
  const std::set<std::uint64_t> distinct(options.seeds.begin(), options.seeds.end());
  if (options.seeds.empty() || distinct.size() != options.seeds.size()) {
    throw ValidationError("seeds must be a non-empty list of distinct values", {"seeds"});
  }
  ExperimentDesign d;
  econ::LeverValues control_overrides, treatment_overrides;
  for (const auto& l : hypothesis.independent_levers) {
    control_overrides[l.name] = l.control;
    treatment_overrides[l.name] = l.treatment;
    d.declared_interventions.insert(l.name);
  }
  const auto control = registry.resolve(control_overrides);
  auto treatment = control;
  for (const auto& [k, v] : registry.resolve(treatment_overrides)) {
    if (treatment_overrides.count(k)) treatment[k] = v;
  }
  d.groups = {{"control", control}, {"treatment", treatment}};
  for (const auto& m : hypothesis.dependent_metrics) d.metrics.push_back(m.name);
  d.horizon = options.horizon;
  d.seeds = options.seeds;
  d.replications = options.seeds.size();
  d.population = options.population;

  auto identity = to_json(d);
  identity.erase("design_id");
  identity.erase("config_hashes");
  d.design_id = "design-" + util::sha256_hex(toolbox::canonical_json(identity)).substr(0, 12);

  if (auto v = validate_minimal_change(d); !v.empty()) {
    std::string msg = "design violates the minimal-change constraint:";
    for (const auto& x : v) msg += " " + x.message + ";";
    throw ValidationError(msg, {"design"});
  }

  for (const auto& g : d.groups) {
    for (auto seed : d.seeds) {
      econ::SimConfig c;
      c.levers = g.levers;
      c.n_households = d.population.n_households;
      c.n_firms = d.population.n_firms;
      c.n_goods = d.population.n_goods;
      c.skill_dims = d.population.skill_dims;
      c.horizon = d.horizon;
      c.seed = seed;
      d.config_hashes.push_back({g.name, seed, toolbox.register_config(c)});
    }
  }
  return d;
}

std::vector<ChangeViolation> validate_minimal_change(const ExperimentDesign& design) {
  std::vector<ChangeViolation> out;
  if (design.groups.size() < 2) {
    out.push_back({"", "", "design needs a control group and at least one treatment group"});
    return out;
  }
  const auto& control = design.groups.front().levers;
  for (std::size_t g = 1; g < design.groups.size(); ++g) {
    const auto& levers = design.groups[g].levers;
    std::set<std::string> names;
    for (const auto& [k, v] : control) names.insert(k);
    for (const auto& [k, v] : levers) names.insert(k);
    std::set<std::string> changed;
    for (const auto& n : names) {
      auto a = control.find(n);
      auto b = levers.find(n);
      if (a == control.end() || b == levers.end() || a->second != b->second) changed.insert(n);
    }
    for (const auto& n : changed) {
      if (!design.declared_interventions.count(n)) out.push_back({design.groups[g].name, n, "extra undeclared change: " + n});
    }
    for (const auto& n : design.declared_interventions) {
      if (!changed.count(n)) out.push_back({design.groups[g].name, n, "declared but unchanged: " + n});
    }
  }
  return out;
}

std::string derived_from_field(const std::vector<std::uint64_t>& ids) {
  std::string out;
  for (auto id : ids) out += (out.empty() ? "#" : ",#") + std::to_string(id);
  return out;
}

ResultBundle execute_design(const ExperimentDesign& design, toolbox::Toolbox& toolbox, memory::MemoryStore* memory,
                            const std::string& session_id, std::optional<std::uint64_t> derived_from,
                            const std::function<void(const ResultBundle&)>& on_started) {
  if (auto v = validate_minimal_change(design); !v.empty()) {
    std::string msg = "refusing to execute: design violates the minimal-change constraint:";
    for (const auto& x : v) msg += " " + x.message + ";";
    throw ValidationError(msg, {"design"});
  }
  ResultBundle bundle;
  bundle.design_id = design.design_id;
  for (const auto& b : design.config_hashes) {
    RunResult r;
    r.group = b.group;
    r.seed = b.seed;
    r.config_hash = b.config_hash;
    r.job_id = toolbox.start_job(b.config_hash, b.seed, design.horizon);
    bundle.runs.push_back(std::move(r));
  }
  if (on_started) on_started(bundle);
  bundle.complete = true;
  for (auto& r : bundle.runs) {
    const auto status = toolbox.wait_finished(r.job_id);
    r.state = toolbox::to_string(status.state);
    if (status.state == toolbox::JobState::succeeded) {
      r.metrics = toolbox.export_results(r.job_id).at("metrics");
    } else {
      bundle.complete = false;
      r.error_category = toolbox::to_string(status.error_category.value_or(toolbox::ErrorCategory::execution_failure));
      r.error = status.error;
    }
    if (memory != nullptr) {
      memory::MemoryRecord rec;
      rec.stage = memory::Stage::execution;
      rec.kind = memory::RecordKind::execution_trace;
      rec.body = {{"design_id", design.design_id}, {"group", r.group},       {"seed", std::to_string(r.seed)},
                  {"job_id", r.job_id},            {"config_hash", r.config_hash}, {"state", r.state}};
      if (derived_from) rec.body.emplace_back("derived_from", derived_from_field({*derived_from}));
      if (!r.error.empty()) rec.text = r.error_category + ": " + r.error;
      rec.refs = {{memory::RefKind::job_id, r.job_id}, {memory::RefKind::config_hash, r.config_hash}};
      memory->append(session_id, std::move(rec));
    }
  }
  return bundle;
}

double aggregate(const json& series, econ::Aggregation aggregation) {
  if (!series.is_array() || series.empty()) throw ValidationError("metric series is empty", {"metrics"});
  switch (aggregation) {
    case econ::Aggregation::final: return series.back().get<double>();
    case econ::Aggregation::cumulative:
    case econ::Aggregation::mean: {
      double sum = 0.0;
      for (const auto& v : series) sum += v.get<double>();
      return aggregation == econ::Aggregation::mean ? sum / static_cast<double>(series.size()) : sum;
    }
  }
  return 0.0;
}

namespace {

int sign(double x) { return (x > 0) - (x < 0); }

}  // namespace

AnalysisReport analyze(const ResultBundle& bundle, const Hypothesis& hypothesis, const ExperimentDesign& design,
                       const econ::ParameterRegistry& registry) {
  if (!bundle.complete) {
    std::size_t failed = 0;
    for (const auto& r : bundle.runs) failed += r.state != "succeeded";
    throw StateError("result bundle is partial (" + std::to_string(failed) + " failed job(s)); analysis needs every run");
  }
  if (design.groups.size() < 2) throw ValidationError("design has no treatment group", {"groups"});
  AnalysisReport report;
  report.design_id = design.design_id;
  const std::string control = design.groups[0].name;
  report.treatment_group = design.groups[1].name;

  auto value_for = [&](const std::string& group, std::uint64_t seed, const std::string& metric, econ::Aggregation agg) {
    for (const auto& r : bundle.runs) {
      if (r.group != group || r.seed != seed) continue;
      if (!r.metrics.is_object() || !r.metrics.contains(metric)) {
        throw ValidationError("metric " + metric + " is absent from the results of job " + r.job_id, {metric});
      }
      return aggregate(r.metrics.at(metric), agg);
    }
    throw ValidationError("no run for group " + group + " seed " + std::to_string(seed), {"runs"});
  };

  bool all_supported = true, all_refuted = true;
  for (const auto& name : design.metrics) {
    const auto* spec = registry.find_metric(name);
    if (spec == nullptr) throw ValidationError("unknown metric: " + name, {name});
    auto expected = std::find_if(hypothesis.dependent_metrics.begin(), hypothesis.dependent_metrics.end(),
                                 [&](const auto& m) { return m.name == name; });
    if (expected == hypothesis.dependent_metrics.end()) {
      throw ValidationError("metric " + name + " has no expected direction in the hypothesis", {name});
    }
    MetricAnalysis m;
    m.name = name;
    m.aggregation = econ::to_string(spec->aggregation);
    m.expected = expected->direction;
    for (auto seed : design.seeds) {
      m.per_seed.push_back({seed, value_for(control, seed, name, spec->aggregation),
                            value_for(report.treatment_group, seed, name, spec->aggregation)});
      m.control_mean += m.per_seed.back().control;
      m.treatment_mean += m.per_seed.back().treatment;
    }
    const double n = static_cast<double>(m.per_seed.size());
    m.control_mean /= n;
    m.treatment_mean /= n;
    if (m.control_mean != 0.0) m.relative_diff = (m.treatment_mean - m.control_mean) / std::abs(m.control_mean);
    const int want = m.expected == Direction::increase ? 1 : -1;
    const int got = sign(m.treatment_mean - m.control_mean);
    m.direction_match = got == want;
    const int first = m.per_seed.empty() ? 0 : sign(m.per_seed.front().treatment - m.per_seed.front().control);
    m.sign_consistent_across_seeds =
        first != 0 && std::all_of(m.per_seed.begin(), m.per_seed.end(),
                                  [&](const SeedComparison& s) { return sign(s.treatment - s.control) == first; });
    const bool enough = m.per_seed.size() >= 3;
    all_supported &= enough && m.direction_match && m.sign_consistent_across_seeds;
    all_refuted &= enough && got == -want && m.sign_consistent_across_seeds;
    report.metrics.push_back(std::move(m));
  }

  if (all_supported) {
    report.verdict = Verdict::supported;
    return report;
  }
  if (all_refuted) {
    report.verdict = Verdict::refuted;
    report.next_directions.push_back(
        "every pre-registered metric moved against the expectation in every seed; consider the opposite hypothesis or a "
        "different lever");
    return report;
  }
  report.verdict = Verdict::insufficient;
  if (design.seeds.size() < 3) report.next_directions.push_back("replicate with at least 3 seeds");
  for (const auto& m : report.metrics) {
    if (!m.sign_consistent_across_seeds) {
      report.next_directions.push_back(m.name + ": per-seed differences disagree in sign; add seeds (for example 1-10) "
                                                "to separate the effect from noise");
    } else if (!m.direction_match) {
      report.next_directions.push_back(m.name + ": moves against the expectation in every seed; revisit the mechanism "
                                                "or pre-register the opposite direction");
    }
  }
  for (const auto& l : hypothesis.independent_levers) {
    if (!l.treatment.is_boolean()) report.next_directions.push_back("try a stronger treatment value for " + l.name);
  }
  report.next_directions.push_back("extend the horizon from " + std::to_string(design.horizon) + " to " +
                                   std::to_string(design.horizon * 2) + " months");
  return report;
}

std::optional<std::string> next_intuition(const std::string& intuition, const AnalysisReport& report) {
  if (report.verdict == Verdict::supported) return std::nullopt;
  std::string draft = intuition;
  if (!report.next_directions.empty()) draft += " (next direction: " + report.next_directions.front() + ")";
  return draft;
}

Provenance trace_provenance(const memory::MemoryStore& memory, const std::string& session_id, std::uint64_t record_id,
                            const memory::RefResolver& resolver) {
  Provenance p;
  std::map<std::uint64_t, memory::MemoryRecord> by_id;
  for (auto& r : memory.query(session_id)) by_id.emplace(r.record_id, std::move(r));
  std::deque<std::uint64_t> todo{record_id};
  while (!todo.empty()) {
    const auto id = todo.front();
    todo.pop_front();
    if (!p.visited.insert(id).second) continue;
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      p.unresolved.push_back("record #" + std::to_string(id));
      continue;
    }
    const auto& rec = it->second;
    for (const auto& ref : rec.refs) {
      if (!resolver(session_id, ref)) {
        p.unresolved.push_back(memory::to_string(ref.kind) + " " + ref.id);
        continue;
      }
      switch (ref.kind) {
        case memory::RefKind::manifest: p.manifests.insert(ref.id); break;
        case memory::RefKind::config_hash: p.config_hashes.insert(ref.id); break;
        case memory::RefKind::job_id: p.job_ids.insert(ref.id); break;
      }
    }
    if (const auto* outcome = rec.field("outcome"); outcome && *outcome == "hypothesis" &&
                                                     rec.kind == memory::RecordKind::theoretical_context) {
      if (!p.hypothesis_record || *p.hypothesis_record < id) p.hypothesis_record = id;
    }
    if (const auto* from = rec.field("derived_from")) {
      for (const auto& part : split(*from, ',')) {
        const auto t = trim(part);
        if (t.size() > 1 && t[0] == '#') todo.push_back(std::stoull(t.substr(1)));
      }
    }
  }
  return p;
}

}  // namespace econlab::orchestrator
