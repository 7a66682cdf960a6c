#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"

namespace dacp::eval {

enum class Task { action_items, support_summary, qmsum, qmsum_i };

constexpr std::string_view to_string(Task t) {
  switch (t) {
    case Task::action_items: return "action_items";
    case Task::support_summary: return "support_summary";
    case Task::qmsum: return "qmsum";
    case Task::qmsum_i: return "qmsum_i";
  }
  return "action_items";
}

inline Task parse_task(std::string_view s) {
  if (s == "action_items") return Task::action_items;
  if (s == "support_summary") return Task::support_summary;
  if (s == "qmsum") return Task::qmsum;
  if (s == "qmsum_i") return Task::qmsum_i;
  throw Error(ErrorKind::config_invalid, "unknown task '" + std::string(s) + "'");
}

using SlotValues = std::map<std::string, std::string>;

/// An instruction with "{Slot Name}" placeholders. The full prompt is the
/// instruction, a blank line, then "Transcript: " followed by the transcript.
/// A slot with an empty allowed-value list accepts free text.
struct PromptTemplate {
  Task task = Task::action_items;
  std::string instruction;
  std::map<std::string, std::vector<std::string>> slots;

  static constexpr std::string_view kTranscriptLead = "\n\nTranscript: ";

  static PromptTemplate builtin(Task task) {
    PromptTemplate t;
    t.task = task;
    switch (task) {
      case Task::action_items:
        t.instruction =
            "For the conversation given below, generate a newline-separated list of work, business, or "
            "service-related TODO tasks that should be completed after the conversation. Each task is a "
            "one-sentence summary of the action to be taken.";
        break;
      case Task::support_summary:
        t.instruction =
            "Generate a {Length Type} summary of the following conversation {Format} without assessing its quality.";
        t.slots["Length Type"] = {"long", "medium", "short"};
        t.slots["Format"] = {"in bullet points", "in a paragraph"};
        break;
      // The meeting-benchmark wordings are not shipped with this toolkit;
      // these stand-ins keep the slot names and are meant to be overridden
      // from a templates file.
      case Task::qmsum:
        t.instruction = "Summarize the meeting transcript given below based on the following query: {Query}";
        t.slots["Query"] = {};
        break;
      case Task::qmsum_i:
        t.instruction = "Generate a {Length Type} summary of the meeting transcript given below.";
        t.slots["Length Type"] = {"long", "medium", "short"};
        break;
    }
    return t;
  }

  /// Overrides from {"<task>": {"instruction": str, "slots": {name: [values]}}}.
  static std::map<Task, PromptTemplate> load_set(const nlohmann::json& overrides) {
    std::map<Task, PromptTemplate> set;
    for (Task t : {Task::action_items, Task::support_summary, Task::qmsum, Task::qmsum_i}) set[t] = builtin(t);
    for (const auto& [name, body] : overrides.items()) {
      PromptTemplate& tmpl = set[parse_task(name)];
      if (body.contains("instruction")) tmpl.instruction = body.at("instruction").get<std::string>();
      if (body.contains("slots")) tmpl.slots = body.at("slots").get<std::map<std::string, std::vector<std::string>>>();
    }
    return set;
  }
};

/// Substitutes every slot; throws missing-slot for an unbound or unresolved
/// placeholder and unknown-slot-value for a value outside the allowed set.
inline std::string render_instruction(const PromptTemplate& tmpl, const SlotValues& values) {
  for (const auto& [name, value] : values) {
    auto it = tmpl.slots.find(name);
    if (it == tmpl.slots.end()) {
      throw Error(ErrorKind::unknown_slot_value, "slot '" + name + "' is not defined for " + std::string(to_string(tmpl.task)));
    }
    const auto& allowed = it->second;
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), value) == allowed.end()) {
      throw Error(ErrorKind::unknown_slot_value, "slot '" + name + "' does not accept '" + value + "'");
    }
  }
  std::string out;
  const std::string& body = tmpl.instruction;
  std::size_t i = 0;
  while (i < body.size()) {
    const std::size_t open = body.find('{', i);
    if (open == std::string::npos) {
      out.append(body, i);
      break;
    }
    const std::size_t close = body.find('}', open);
    if (close == std::string::npos) throw Error(ErrorKind::missing_slot, "unterminated placeholder in template");
    out.append(body, i, open - i);
    const std::string name = body.substr(open + 1, close - open - 1);
    auto v = values.find(name);
    if (v == values.end()) throw Error(ErrorKind::missing_slot, "slot '" + name + "' is not bound");
    out += v->second;
    i = close + 1;
  }
  return out;
}

inline std::string render_prompt(const PromptTemplate& tmpl, const SlotValues& values, std::string_view transcript_text) {
  std::string out = render_instruction(tmpl, values);
  out += PromptTemplate::kTranscriptLead;
  out += transcript_text;
  return out;
}

}  // namespace dacp::eval
