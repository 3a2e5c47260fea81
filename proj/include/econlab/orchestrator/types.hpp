#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "econlab/econ/registry.hpp"

namespace econlab::orchestrator {

using nlohmann::json;

enum class Direction { increase, decrease };
std::string to_string(Direction d);

struct LeverChange {
  std::string name;
  json control;
  json treatment;
};

struct MetricExpectation {
  std::string name;
  Direction direction = Direction::increase;
};

struct EvidenceRef {
  std::string manifest_id;
  std::string doc_id;
  std::uint32_t seq = 0;
  double score = 0.0;
};

struct Hypothesis {
  std::string statement;
  std::vector<LeverChange> independent_levers;
  std::vector<MetricExpectation> dependent_metrics;
  std::vector<std::string> mechanism_chain;
  std::vector<EvidenceRef> evidence;
};

enum class ViolationKind { missing_variable, unsupported_intervention, inconsistent_assumption };
std::string to_string(ViolationKind k);

struct Violation {
  ViolationKind kind = ViolationKind::missing_variable;
  std::string subject;
  std::string detail;
};

inline constexpr std::string_view kProxyLabel = "[PROXY]";

struct FeasibilityDiagnosis {
  std::vector<Violation> violations;
  std::optional<std::string> proxy_suggestion;  // always starts with kProxyLabel
};

struct Group {
  std::string name;
  econ::LeverValues levers;  // every registry lever, resolved
};

struct HashBinding {
  std::string group;
  std::uint64_t seed = 0;
  std::string config_hash;
};

struct Population {
  int n_households = 5;
  int n_firms = 2;
  int n_goods = 2;
  int skill_dims = 2;
};

struct ExperimentDesign {
  std::string design_id;
  std::vector<Group> groups;  // groups[0] is the control
  std::set<std::string> declared_interventions;
  std::vector<std::string> metrics;
  int horizon = 24;
  std::vector<std::uint64_t> seeds;
  std::size_t replications = 0;
  Population population;
  std::vector<HashBinding> config_hashes;
};

struct RunResult {
  std::string group;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string job_id;
  std::string state;
  std::string error_category;  // empty unless failed
  std::string error;
  json metrics;  // metric name -> series; null unless succeeded
};

struct ResultBundle {
  std::string design_id;
  bool complete = false;
  std::vector<RunResult> runs;
};

struct SeedComparison {
  std::uint64_t seed = 0;
  double control = 0.0;
  double treatment = 0.0;
};

struct MetricAnalysis {
  std::string name;
  std::string aggregation;  // cumulative | final | mean
  Direction expected = Direction::increase;
  double control_mean = 0.0;
  double treatment_mean = 0.0;
  std::optional<double> relative_diff;  // (treatment - control) / |control|; unset when control is 0
  std::vector<SeedComparison> per_seed;
  bool direction_match = false;
  bool sign_consistent_across_seeds = false;
};

enum class Verdict { supported, refuted, insufficient };
std::string to_string(Verdict v);

struct AnalysisReport {
  std::string design_id;
  std::string treatment_group;
  std::vector<MetricAnalysis> metrics;
  Verdict verdict = Verdict::insufficient;
  std::vector<std::string> next_directions;
};

json to_json(const Hypothesis& h);
json to_json(const FeasibilityDiagnosis& d);
json to_json(const ExperimentDesign& d);
json to_json(const ResultBundle& b);
json to_json(const AnalysisReport& r);

Hypothesis hypothesis_from_json(const json& j);
FeasibilityDiagnosis diagnosis_from_json(const json& j);
ExperimentDesign design_from_json(const json& j);
ResultBundle bundle_from_json(const json& j);
AnalysisReport report_from_json(const json& j);

}  // namespace econlab::orchestrator
