#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "econlab/behavior/decision.hpp"

namespace econlab::behavior {

/// Transport-level provider failure (timeout, exhausted script, remote error).
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text-generation backend: prompt in, reply out. Implementations must tolerate concurrent
/// calls from independent runs.
class TextProvider {
 public:
  virtual ~TextProvider() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Replays canned replies in order. In the file format each line is one reply and the
/// two-character sequence `\n` inside a line stands for a newline.
class ScriptedProvider final : public TextProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> replies);
  static ScriptedProvider from_file(const std::filesystem::path& path);
  /// The replies of a scripted file, unescaped.
  static std::vector<std::string> read_file(const std::filesystem::path& path);

  std::string complete(const std::string& prompt) override;

  std::size_t remaining() const;
  /// Prompts received so far, in call order.
  std::vector<std::string> prompts() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  std::vector<std::string> prompts_;
};

/// Provider timeout from ECON_PROVIDER_TIMEOUT_MS, or `fallback` when unset/invalid.
std::chrono::milliseconds provider_timeout_from_env(std::chrono::milliseconds fallback = std::chrono::milliseconds(30000));

/// Bounds each call of the wrapped provider; a slow call raises ProviderError.
class TimedProvider final : public TextProvider {
 public:
  TimedProvider(std::shared_ptr<TextProvider> inner, std::chrono::milliseconds timeout);

  std::string complete(const std::string& prompt) override;

 private:
  std::shared_ptr<TextProvider> inner_;
  std::chrono::milliseconds timeout_;
};

/// Substitutes `{{name}}` placeholders with fields of the context's JSON rendering.
std::string render_template(std::string_view tmpl, const DecisionContext& ctx);

struct PromptTemplates {
  std::string household;
  std::string firm;
};

PromptTemplates default_prompt_templates();

/// Asks `provider` for a decision, parsing with parse_decision. Parse failures and transport
/// failures fall back to decide_rule_based; out-of-range values are clamped. Both are
/// reported through `notes`.
Decision decide_via_provider(const DecisionContext& ctx, TextProvider& provider, const PromptTemplates& templates,
                             std::vector<BehaviorNote>& notes);

/// DecisionProvider adapter around a TextProvider.
class TextDecisionProvider final : public DecisionProvider {
 public:
  TextDecisionProvider(std::shared_ptr<TextProvider> provider, PromptTemplates templates = default_prompt_templates());

  Decision decide(const DecisionContext& ctx) override;
  std::vector<BehaviorNote> take_notes() override;

 private:
  std::shared_ptr<TextProvider> provider_;
  PromptTemplates templates_;
  std::vector<BehaviorNote> notes_;
};

}  // namespace econlab::behavior
