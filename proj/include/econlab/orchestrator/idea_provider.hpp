#pragma once

#include <string>

#include "econlab/behavior/text_provider.hpp"

namespace econlab::orchestrator {

/// Offline stand-in for a language model at the idea stage. Reads the "Intuition:" line of
/// the prompt and answers in the reply grammar by keyword matching; answers with a bare
/// STATEMENT when no lever keyword is present.
class KeywordIdeaProvider final : public behavior::TextProvider {
 public:
  std::string complete(const std::string& prompt) override;
};

}  // namespace econlab::orchestrator
