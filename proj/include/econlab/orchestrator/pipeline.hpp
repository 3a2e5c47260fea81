#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "econlab/behavior/text_provider.hpp"
#include "econlab/knowledge/manifest.hpp"
#include "econlab/memory/store.hpp"
#include "econlab/orchestrator/types.hpp"
#include "econlab/toolbox/toolbox.hpp"

namespace econlab::orchestrator {

// ---- idea development -------------------------------------------------------------

/// Prompt for parameter elicitation. Lists every lever and metric name verbatim so a
/// reply naming anything else is caught by exact matching.
std::string idea_prompt(const std::string& intuition, const econ::ParameterRegistry& registry,
                        const std::vector<knowledge::RetrievedChunk>& evidence);

/// Reply grammar, one item per line:
///   STATEMENT=<text>
///   LEVER=<name>:<control>:<treatment>   (values true/false or numbers; a bare boolean
///                                         lever name means default -> its negation)
///   METRIC=<name>:increase|decrease
///   MECHANISM=<step>                     (repeatable, kept in order)
struct IdeaDraft {
  std::string statement;
  struct Lever {
    std::string name;
    std::optional<json> control;
    std::optional<json> treatment;
    std::string raw;
  };
  struct Metric {
    std::string name;
    std::string direction;
  };
  std::vector<Lever> levers;
  std::vector<Metric> metrics;
  std::vector<std::string> mechanism;
  bool recognized = false;  // at least one grammar line was present
};

IdeaDraft parse_idea_reply(const std::string& reply);

/// Checks a draft against the capability boundary. Returns the hypothesis (without
/// evidence) or a diagnosis whose violations each name the offending symbol.
std::variant<Hypothesis, FeasibilityDiagnosis> check_feasibility(const IdeaDraft& draft, const std::string& intuition,
                                                                 const econ::ParameterRegistry& registry);

/// "[PROXY] ..." pointing at the registry lever sharing most words with `text`.
std::string proxy_suggestion(const std::string& text, const econ::ParameterRegistry& registry);

struct IdeaServices {
  const knowledge::Index& index;
  knowledge::ManifestStore& manifests;
  memory::MemoryStore& memory;
  const econ::ParameterRegistry& registry;
  behavior::TextProvider& provider;
};

struct IdeaOptions {
  std::size_t k = 8;
  int attempts = 3;  // provider calls before giving up
  knowledge::SearchFilters filters;
};

struct IdeaResult {
  std::variant<Hypothesis, FeasibilityDiagnosis> outcome;
  std::string manifest_id;
  std::vector<knowledge::RetrievedChunk> evidence;
  std::uint64_t record_id = 0;

  bool feasible() const noexcept { return std::holds_alternative<Hypothesis>(outcome); }
};

/// Retrieve (writes a manifest), elicit, check, and record a theoretical_context memory
/// record either way. Throws StateError on an empty index.
IdeaResult develop_idea(IdeaServices services, const std::string& session_id, const std::string& intuition,
                        const IdeaOptions& options = {});

// ---- design --------------------------------------------------------------------------

struct DesignOptions {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  int horizon = 24;
  Population population;
};

/// Control = registry defaults with the hypothesis's control values; one treatment group
/// applying every treatment value together. Registers each (group, seed) config with the
/// toolbox. Throws ValidationError if the result would not pass the minimal-change gate.
ExperimentDesign design_experiment(const Hypothesis& hypothesis, const econ::ParameterRegistry& registry,
                                   toolbox::Toolbox& toolbox, const DesignOptions& options = {});

struct ChangeViolation {
  std::string group;
  std::string lever;
  std::string message;  // "extra undeclared change: X" | "declared but unchanged: X"
};

/// Empty when every non-control group differs from the control in exactly the declared levers.
std::vector<ChangeViolation> validate_minimal_change(const ExperimentDesign& design);

// ---- execution and analysis ----------------------------------------------------------

/// Runs one job per (group, seed) through the toolbox and waits for all of them. Refuses
/// designs that fail validate_minimal_change. When `memory` is given, writes one
/// execution_trace record per job referencing its job id and config hash. `on_started` sees
/// the bundle once every job is queued, before any is awaited.
ResultBundle execute_design(const ExperimentDesign& design, toolbox::Toolbox& toolbox,
                            memory::MemoryStore* memory = nullptr, const std::string& session_id = {},
                            std::optional<std::uint64_t> derived_from = std::nullopt,
                            const std::function<void(const ResultBundle&)>& on_started = {});

/// One number per run for `metric`, following the registry's aggregation rule.
double aggregate(const json& series, econ::Aggregation aggregation);

/// Verdict over the pre-registered metrics only. Throws StateError for a partial bundle and
/// ValidationError when a metric is missing from the results.
AnalysisReport analyze(const ResultBundle& bundle, const Hypothesis& hypothesis, const ExperimentDesign& design,
                       const econ::ParameterRegistry& registry = econ::default_registry());

/// Draft intuition for the next round, or nullopt when the report is conclusive (supported).
std::optional<std::string> next_intuition(const std::string& intuition, const AnalysisReport& report);

// ---- provenance ----------------------------------------------------------------------

struct Provenance {
  std::set<std::string> manifests;
  std::optional<std::uint64_t> hypothesis_record;
  std::set<std::string> config_hashes;
  std::set<std::string> job_ids;
  std::set<std::uint64_t> visited;
  std::vector<std::string> unresolved;  // "kind id" of refs the resolver rejected
};

/// Walks derived_from links and refs backwards from `record_id`.
Provenance trace_provenance(const memory::MemoryStore& memory, const std::string& session_id, std::uint64_t record_id,
                            const memory::RefResolver& resolver);

/// Formats record ids for the derived_from body field ("#3,#4").
std::string derived_from_field(const std::vector<std::uint64_t>& ids);

}  // namespace econlab::orchestrator
