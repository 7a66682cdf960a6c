#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dacp/transcript.hpp"

namespace dacp {

enum class TagStyle { speaker_index, name, initials, role };

constexpr std::string_view to_string(TagStyle s) {
  switch (s) {
    case TagStyle::speaker_index: return "speaker-index";
    case TagStyle::name: return "name";
    case TagStyle::initials: return "initials";
    case TagStyle::role: return "role";
  }
  return "speaker-index";
}

inline TagStyle parse_tag_style(std::string_view s) {
  if (s == "speaker-index") return TagStyle::speaker_index;
  if (s == "name") return TagStyle::name;
  if (s == "initials") return TagStyle::initials;
  if (s == "role") return TagStyle::role;
  throw Error(ErrorKind::config_invalid, "unknown tag style '" + std::string(s) + "'");
}

struct RenderStyle {
  TagStyle tag_style = TagStyle::speaker_index;
  bool timestamps = false;
  int blank_lines_between_turns = 0;  // 0, 1 or 2
  bool merge_consecutive = false;

  bool operator==(const RenderStyle&) const = default;
};

/// Optional display information for the "name", "initials" and "role" tags.
/// Name-based tags fall back to speaker-index unless every speaker is named.
struct SpeakerLabels {
  std::map<std::string, std::string> names;
  std::map<std::string, std::string> roles;
};

/// Collapses maximal runs of same-speaker turns; texts are joined with one
/// space and the run keeps its first start_ms.
inline Transcript merge_turns(const Transcript& t) {
  Transcript out = t;
  out.turns.clear();
  for (const auto& turn : t.turns) {
    if (!out.turns.empty() && out.turns.back().speaker_id == turn.speaker_id) {
      out.turns.back().text += ' ';
      out.turns.back().text += turn.text;
    } else {
      out.turns.push_back(turn);
    }
  }
  return out;
}

/// "[mm:ss]" from a millisecond offset; minutes are not wrapped into hours.
inline std::string format_timestamp(std::int64_t start_ms) {
  const std::int64_t total_s = start_ms / 1000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "[%02lld:%02lld]", static_cast<long long>(total_s / 60),
                static_cast<long long>(total_s % 60));
  return buf;
}

inline std::string initials_of(std::string_view name) {
  std::string out;
  bool at_start = true;
  for (char c : name) {
    if (c == ' ' || c == '-' || c == '\t') {
      at_start = true;
    } else if (at_start) {
      out += (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
      at_start = false;
    }
  }
  return out;
}

/// Renders one line per turn as "<tag>: <text>", optionally prefixed by a
/// timestamp, with `blank_lines_between_turns` empty lines between turns.
inline std::string render_text(const Transcript& input, const RenderStyle& style, const SpeakerLabels& labels = {}) {
  const Transcript merged = style.merge_consecutive ? merge_turns(input) : Transcript{};
  const Transcript& t = style.merge_consecutive ? merged : input;

  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& turn : t.turns) {
    if (index.emplace(turn.speaker_id, order.size()).second) order.push_back(turn.speaker_id);
  }

  TagStyle tag_style = style.tag_style;
  if (tag_style == TagStyle::name || tag_style == TagStyle::initials) {
    for (const auto& s : order) {
      if (!labels.names.count(s)) {
        tag_style = TagStyle::speaker_index;
        break;
      }
    }
  }

  std::unordered_map<std::string, std::string> tags;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::string& s = order[i];
    switch (tag_style) {
      case TagStyle::speaker_index: tags[s] = "Speaker " + std::to_string(i + 1); break;
      case TagStyle::name: tags[s] = labels.names.at(s); break;
      case TagStyle::initials: tags[s] = initials_of(labels.names.at(s)); break;
      case TagStyle::role: {
        auto it = labels.roles.find(s);
        tags[s] = it != labels.roles.end() ? it->second : (i == 0 ? "Agent" : "Customer");
        break;
      }
    }
  }

  const std::string separator(1 + static_cast<std::size_t>(std::clamp(style.blank_lines_between_turns, 0, 2)), '\n');
  std::string out;
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const Turn& turn = t.turns[i];
    if (i > 0) out += separator;
    if (style.timestamps) {
      out += format_timestamp(turn.start_ms);
      out += ' ';
    }
    out += tags[turn.speaker_id];
    out += ": ";
    out += turn.text;
  }
  return out;
}

}  // namespace dacp
