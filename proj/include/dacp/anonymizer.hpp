#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

enum class AnonymizeAction { mask, noise };

/// A named sensitive-information category and how to find it. Dictionary
/// terms match whole words, ASCII case-insensitively.
struct InfoType {
  enum class Detector { regex, dictionary };

  std::string name;
  Detector detector = Detector::regex;
  std::string pattern;
  std::vector<std::string> terms;

  std::shared_ptr<const std::regex> compiled;
};

struct DetectionSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string info_type;
  std::string surface;

  bool operator==(const DetectionSpan&) const = default;
};

inline bool is_info_type_name(std::string_view name) {
  if (name.empty() || !(name.front() >= 'A' && name.front() <= 'Z')) return false;
  return std::all_of(name.begin(), name.end(),
                     [](char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_'; });
}

struct AnonymizationPolicy {
  std::vector<InfoType> info_types;
  std::map<std::string, AnonymizeAction> actions;
  std::map<std::string, std::vector<std::string>> replacement_pools;
  std::uint64_t seed = 0;

  const InfoType* find(std::string_view name) const {
    for (const auto& t : info_types) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  AnonymizeAction action_for(const std::string& name) const {
    auto it = actions.find(name);
    return it == actions.end() ? AnonymizeAction::mask : it->second;
  }

  /// Every invariant violation, not just the first.
  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    std::map<std::string, int> seen;
    for (const auto& t : info_types) {
      if (!is_info_type_name(t.name)) v.push_back("info type '" + t.name + "' is not UPPER_SNAKE_CASE");
      if (++seen[t.name] == 2) v.push_back("duplicate info type '" + t.name + "'");
      if (t.detector == InfoType::Detector::regex && t.pattern.empty()) v.push_back(t.name + ": empty pattern");
      if (t.detector == InfoType::Detector::dictionary && t.terms.empty()) v.push_back(t.name + ": empty dictionary");
    }
    for (const auto& [name, action] : actions) {
      if (!seen.count(name)) v.push_back("action for unknown info type '" + name + "'");
      if (action == AnonymizeAction::noise) {
        auto it = replacement_pools.find(name);
        if (it == replacement_pools.end() || it->second.empty()) v.push_back(name + ": noise action needs a nonempty pool");
      }
    }
    return v;
  }

  /// Compiles regex detectors; throws invalid-pattern on a bad expression.
  void compile() {
    for (auto& t : info_types) {
      if (t.detector != InfoType::Detector::regex) continue;
      try {
        t.compiled = std::make_shared<const std::regex>(t.pattern, std::regex::ECMAScript | std::regex::optimize);
      } catch (const std::regex_error& e) {
        throw Error(ErrorKind::invalid_pattern, t.name + ": " + e.what());
      }
    }
  }

  /// Loads the policy file format:
  /// {"seed": n, "info_types": [{"name", "regex" | "dictionary", "action", "pool"}]}
  static AnonymizationPolicy from_json(const nlohmann::json& j) {
    AnonymizationPolicy p;
    std::vector<std::string> problems;
    if (j.contains("seed")) p.seed = j.at("seed").get<std::uint64_t>();
    if (!j.contains("info_types") || !j.at("info_types").is_array()) {
      throw Error(ErrorKind::config_invalid, "policy: info_types array required");
    }
    for (const auto& jt : j.at("info_types")) {
      InfoType t;
      t.name = jt.value("name", "");
      if (jt.contains("regex")) {
        t.detector = InfoType::Detector::regex;
        t.pattern = jt.at("regex").get<std::string>();
      } else if (jt.contains("dictionary")) {
        t.detector = InfoType::Detector::dictionary;
        t.terms = jt.at("dictionary").get<std::vector<std::string>>();
      } else {
        problems.push_back(t.name + ": needs 'regex' or 'dictionary'");
      }
      const std::string action = jt.value("action", "mask");
      if (action == "mask") {
        p.actions[t.name] = AnonymizeAction::mask;
      } else if (action == "noise") {
        p.actions[t.name] = AnonymizeAction::noise;
      } else {
        problems.push_back(t.name + ": unknown action '" + action + "'");
      }
      if (jt.contains("pool")) p.replacement_pools[t.name] = jt.at("pool").get<std::vector<std::string>>();
      p.info_types.push_back(std::move(t));
    }
    for (auto& v : p.violations()) problems.push_back(std::move(v));
    if (!problems.empty()) {
      std::string msg = "policy invalid:";
      for (const auto& s : problems) msg += "\n  - " + s;
      throw Error(ErrorKind::config_invalid, msg);
    }
    p.compile();
    return p;
  }
};

namespace detail {

inline char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

inline bool word_boundary(std::string_view text, std::size_t begin, std::size_t end) {
  const bool left = begin == 0 || !Tokenizer::is_word_byte(static_cast<unsigned char>(text[begin - 1]));
  const bool right = end == text.size() || !Tokenizer::is_word_byte(static_cast<unsigned char>(text[end]));
  return left && right;
}

/// Byte ranges of existing mask tokens such as <PERSON_NAME_1>.
inline std::vector<std::pair<std::size_t, std::size_t>> mask_token_ranges(std::string_view text) {
  static const std::regex kMaskToken("<[A-Z][A-Z0-9_]*_[0-9]+>");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::cregex_iterator it(text.data(), text.data() + text.size(), kMaskToken), end; it != end; ++it) {
    const auto pos = static_cast<std::size_t>(it->position());
    out.emplace_back(pos, pos + static_cast<std::size_t>(it->length()));
  }
  return out;
}

}  // namespace detail

/// Finds sensitive spans. Candidates overlapping an existing mask token are
/// ignored, so masking is a one-pass fixed point. Overlaps are resolved
/// greedily by (longer span, earlier start, info-type name); the result is
/// sorted by start.
inline std::vector<DetectionSpan> detect(std::string_view text, const AnonymizationPolicy& policy) {
  std::vector<DetectionSpan> candidates;
  for (const auto& type : policy.info_types) {
    if (type.detector == InfoType::Detector::regex) {
      if (!type.compiled) throw Error(ErrorKind::invalid_pattern, type.name + ": policy not compiled");
      for (std::cregex_iterator it(text.data(), text.data() + text.size(), *type.compiled), end; it != end; ++it) {
        if (it->length() == 0) continue;
        const auto pos = static_cast<std::size_t>(it->position());
        const auto len = static_cast<std::size_t>(it->length());
        candidates.push_back({pos, pos + len, type.name, std::string(text.substr(pos, len))});
      }
    } else {
      std::string lowered(text);
      std::transform(lowered.begin(), lowered.end(), lowered.begin(), detail::ascii_lower);
      for (const auto& term : type.terms) {
        if (term.empty()) continue;
        std::string needle(term);
        std::transform(needle.begin(), needle.end(), needle.begin(), detail::ascii_lower);
        for (std::size_t pos = lowered.find(needle); pos != std::string::npos; pos = lowered.find(needle, pos + 1)) {
          if (detail::word_boundary(text, pos, pos + needle.size())) {
            candidates.push_back({pos, pos + needle.size(), type.name, std::string(text.substr(pos, needle.size()))});
          }
        }
      }
    }
  }

  const auto masks = detail::mask_token_ranges(text);
  std::erase_if(candidates, [&](const DetectionSpan& s) {
    return std::any_of(masks.begin(), masks.end(), [&](const auto& m) { return s.start < m.second && m.first < s.end; });
  });

  std::sort(candidates.begin(), candidates.end(), [](const DetectionSpan& a, const DetectionSpan& b) {
    const auto la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.start != b.start) return a.start < b.start;
    return a.info_type < b.info_type;
  });
  std::vector<DetectionSpan> accepted;
  for (auto& c : candidates) {
    const bool clash = std::any_of(accepted.begin(), accepted.end(),
                                   [&](const DetectionSpan& a) { return c.start < a.end && a.start < c.end; });
    if (!clash) accepted.push_back(std::move(c));
  }
  std::sort(accepted.begin(), accepted.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return accepted;
}

/// Document-scoped surface -> replacement table. Mask indices count per info
/// type from 1 in first-occurrence order.
class ReplacementMap {
 public:
  const std::string& mask_token(const std::string& info_type, const std::string& surface) {
    auto key = std::make_pair(info_type, surface);
    auto it = table_.find(key);
    if (it != table_.end()) return it->second;
    const std::size_t k = ++next_index_[info_type];
    return table_.emplace(std::move(key), "<" + info_type + "_" + std::to_string(k) + ">").first->second;
  }

  const std::string& noise(const std::string& info_type, const std::string& surface, const AnonymizationPolicy& policy);

  const std::map<std::pair<std::string, std::string>, std::string>& entries() const { return table_; }

  std::string lookup(const std::string& info_type, const std::string& surface) const {
    auto it = table_.find({info_type, surface});
    return it == table_.end() ? std::string() : it->second;
  }

 private:
  std::map<std::pair<std::string, std::string>, std::string> table_;
  std::map<std::string, std::size_t> next_index_;
};

/// Hash-keyed pool choice: index hash(seed, surface) mod |pool|, advancing to
/// the next element while the candidate equals the surface itself.
inline const std::string& noise_replacement(std::uint64_t seed, std::string_view surface,
                                            const std::vector<std::string>& pool) {
  if (pool.empty()) throw Error(ErrorKind::pool_exhausted_self_collision, "empty replacement pool");
  const std::size_t start = static_cast<std::size_t>(keyed_hash(seed, {"noise", surface}) % pool.size());
  for (std::size_t step = 0; step < pool.size(); ++step) {
    const std::string& candidate = pool[(start + step) % pool.size()];
    if (candidate != surface) return candidate;
  }
  throw Error(ErrorKind::pool_exhausted_self_collision, "pool only contains the surface itself");
}

inline const std::string& ReplacementMap::noise(const std::string& info_type, const std::string& surface,
                                                const AnonymizationPolicy& policy) {
  auto key = std::make_pair(info_type, surface);
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  auto pool = policy.replacement_pools.find(info_type);
  if (pool == policy.replacement_pools.end()) {
    throw Error(ErrorKind::pool_exhausted_self_collision, info_type + ": no replacement pool");
  }
  return table_.emplace(std::move(key), noise_replacement(policy.seed, surface, pool->second)).first->second;
}

struct RewriteResult {
  std::string text;
  ReplacementMap mapping;
};

namespace detail {

template <typename ReplaceFn>
std::string splice(std::string_view text, const std::vector<DetectionSpan>& spans, ReplaceFn&& replace) {
  std::string out;
  out.reserve(text.size());
  std::size_t cursor = 0;
  for (const auto& s : spans) {
    if (s.start < cursor || s.end > text.size() || s.start >= s.end) {
      throw Error(ErrorKind::schema_violation, "spans must be sorted, non-overlapping and in range");
    }
    out.append(text.substr(cursor, s.start - cursor));
    out.append(replace(s));
    cursor = s.end;
  }
  out.append(text.substr(cursor));
  return out;
}

}  // namespace detail

/// Replaces every span with its <INFO_TYPE_k> token, continuing the numbering
/// already present in `mapping` (one mapping per document).
inline std::string mask_spans(std::string_view text, const std::vector<DetectionSpan>& spans, ReplacementMap& mapping) {
  return detail::splice(text, spans, [&](const DetectionSpan& s) { return mapping.mask_token(s.info_type, s.surface); });
}

inline RewriteResult mask_spans(std::string_view text, const std::vector<DetectionSpan>& spans) {
  RewriteResult r;
  r.text = mask_spans(text, spans, r.mapping);
  return r;
}

inline std::string noise_spans(std::string_view text, const std::vector<DetectionSpan>& spans,
                               const AnonymizationPolicy& policy, ReplacementMap& mapping) {
  return detail::splice(text, spans, [&](const DetectionSpan& s) { return mapping.noise(s.info_type, s.surface, policy); });
}

inline RewriteResult noise_spans(std::string_view text, const std::vector<DetectionSpan>& spans,
                                 const AnonymizationPolicy& policy) {
  RewriteResult r;
  r.text = noise_spans(text, spans, policy, r.mapping);
  return r;
}

/// Per-info-type replacement counts. Never holds surfaces.
using AuditCounts = std::map<std::string, std::uint64_t>;

/// Detects and rewrites one text, applying each info type's action.
inline std::string anonymize_text(std::string_view text, const AnonymizationPolicy& policy, ReplacementMap& mapping,
                                  AuditCounts* audit = nullptr) {
  const auto spans = detect(text, policy);
  return detail::splice(text, spans, [&](const DetectionSpan& s) -> std::string {
    if (audit) ++(*audit)[s.info_type];
    return policy.action_for(s.info_type) == AnonymizeAction::noise ? mapping.noise(s.info_type, s.surface, policy)
                                                                      : mapping.mask_token(s.info_type, s.surface);
  });
}

inline std::string anonymize_text(std::string_view text, const AnonymizationPolicy& policy) {
  ReplacementMap mapping;
  return anonymize_text(text, policy, mapping);
}

/// Rewrites every turn of a transcript with one document-wide mapping, so a
/// name keeps the same token across turns.
inline Transcript anonymize(const Transcript& t, const AnonymizationPolicy& policy, AuditCounts* audit = nullptr) {
  Transcript out = t;
  ReplacementMap mapping;
  for (auto& turn : out.turns) turn.text = anonymize_text(turn.text, policy, mapping, audit);
  return out;
}

}  // namespace dacp
