#include "econlab/behavior/text_provider.hpp"

#include <cstdlib>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace econlab::behavior {

ScriptedProvider::ScriptedProvider(std::vector<std::string> replies) : replies_(std::move(replies)) {}

std::vector<std::string> ScriptedProvider::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError("cannot open scripted replies file: " + path.string());
  std::vector<std::string> replies;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string reply;
    reply.reserve(line.size());
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == 'n') {
        reply.push_back('\n');
        ++i;
      } else {
        reply.push_back(line[i]);
      }
    }
    replies.push_back(std::move(reply));
  }
  return replies;
}

ScriptedProvider ScriptedProvider::from_file(const std::filesystem::path& path) { return ScriptedProvider(read_file(path)); }

std::string ScriptedProvider::complete(const std::string& prompt) {
  std::lock_guard lock(mutex_);
  prompts_.push_back(prompt);
  if (next_ >= replies_.size()) throw ProviderError("scripted provider exhausted after " + std::to_string(next_) + " replies");
  return replies_[next_++];
}

std::size_t ScriptedProvider::remaining() const {
  std::lock_guard lock(mutex_);
  return replies_.size() - next_;
}

std::vector<std::string> ScriptedProvider::prompts() const {
  std::lock_guard lock(mutex_);
  return prompts_;
}

std::chrono::milliseconds provider_timeout_from_env(std::chrono::milliseconds fallback) {
  const char* raw = std::getenv("ECON_PROVIDER_TIMEOUT_MS");
  if (raw == nullptr || *raw == '\0') return fallback;
  char* end = nullptr;
  const long long ms = std::strtoll(raw, &end, 10);
  if (end == raw || *end != '\0' || ms <= 0) return fallback;
  return std::chrono::milliseconds(ms);
}

TimedProvider::TimedProvider(std::shared_ptr<TextProvider> inner, std::chrono::milliseconds timeout)
    : inner_(std::move(inner)), timeout_(timeout) {}

std::string TimedProvider::complete(const std::string& prompt) {
  auto promise = std::make_shared<std::promise<std::string>>();
  auto future = promise->get_future();
  // Detached so a hung backend cannot block the caller past the timeout.
  std::thread([inner = inner_, promise, prompt] {
    try {
      promise->set_value(inner->complete(prompt));
    } catch (...) {
      promise->set_exception(std::current_exception());
    }
  }).detach();
  if (future.wait_for(timeout_) != std::future_status::ready) {
    throw ProviderError("provider timed out after " + std::to_string(timeout_.count()) + " ms");
  }
  return future.get();
}

std::string render_template(std::string_view tmpl, const DecisionContext& ctx) {
  const auto fields = to_json(ctx);
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    out.append(tmpl.substr(pos, open - pos));
    const std::string key(tmpl.substr(open + 2, close - open - 2));
    if (auto it = fields.find(key); it != fields.end()) {
      out += it->is_string() ? it->get<std::string>() : it->dump();
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

PromptTemplates default_prompt_templates() {
  return {
      "You are household {{id}} in a simulated economy. Cash: {{cash}} cents. Deposits: {{deposits}} cents. "
      "Employed: {{employed}} (wage {{wage}}). Last month income {{last_income}}, consumption {{last_consumption}}. "
      "Price level {{price_level}}, unemployment rate {{unemployment_rate}}.\n"
      "Decide what share of your cash to spend on goods this month.\n"
      "Reply with exactly one line: PROPENSITY=<number between 0.3 and 0.95>",
      "You run firm {{id}} producing good {{good_id}}. Price {{price}} cents, inventory {{inventory}}, "
      "sold {{last_sales}} units last month. Cash {{cash}} cents, wage offer {{wage_offer}}, "
      "{{employees}}/{{target_slots}} positions filled, {{last_unfilled}} vacancies went unfilled.\n"
      "Reply with two lines: WAGE_MULT=<number in [0.5, 2.0]> and PRICE_MULT=<number in [0.5, 2.0]>",
  };
}

Decision decide_via_provider(const DecisionContext& ctx, TextProvider& provider, const PromptTemplates& templates,
                             std::vector<BehaviorNote>& notes) {
  const auto kind = ctx.kind();
  const std::string prompt = render_template(kind == AgentKind::household ? templates.household : templates.firm, ctx);
  const std::string who = to_string(kind) + " " + std::to_string(to_json(ctx).at("id").get<AgentId>());
  std::string reply;
  try {
    reply = provider.complete(prompt);
  } catch (const std::exception& e) {
    notes.push_back({"error", "transport", who + ": provider failure: " + e.what()});
    notes.push_back({"warn", "fallback", who + ": rule-based decision used"});
    return decide_rule_based(ctx);
  }
  auto parsed = parse_decision(reply, kind);
  if (auto* err = std::get_if<ParseError>(&parsed)) {
    notes.push_back({"warn", "fallback", who + ": unparseable reply (" + err->message + "); rule-based decision used"});
    return decide_rule_based(ctx);
  }
  Decision d = std::get<Decision>(parsed);
  const Decision raw = d;
  if (clamp_decision(d)) {
    std::ostringstream os;
    os << who << ": clamped decision";
    if (raw.consumption_propensity != d.consumption_propensity) os << " PROPENSITY " << raw.consumption_propensity << "->" << d.consumption_propensity;
    if (raw.wage_offer_multiplier != d.wage_offer_multiplier) os << " WAGE_MULT " << raw.wage_offer_multiplier << "->" << d.wage_offer_multiplier;
    if (raw.price_multiplier != d.price_multiplier) os << " PRICE_MULT " << raw.price_multiplier << "->" << d.price_multiplier;
    notes.push_back({"warn", "clamp", os.str()});
  }
  return d;
}

TextDecisionProvider::TextDecisionProvider(std::shared_ptr<TextProvider> provider, PromptTemplates templates)
    : provider_(std::move(provider)), templates_(std::move(templates)) {}

Decision TextDecisionProvider::decide(const DecisionContext& ctx) {
  return decide_via_provider(ctx, *provider_, templates_, notes_);
}

std::vector<BehaviorNote> TextDecisionProvider::take_notes() { return std::exchange(notes_, {}); }

}  // namespace econlab::behavior
