#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/utf8.hpp"

namespace dacp {

struct Turn {
  std::string speaker_id;
  std::int64_t start_ms = 0;
  std::string text;

  bool operator==(const Turn&) const = default;
};

struct Transcript {
  std::string id;
  std::string org_id;
  std::string language;
  double duration_s = 0.0;
  std::vector<Turn> turns;

  bool operator==(const Transcript&) const = default;

  std::size_t distinct_speaker_count() const {
    std::set<std::string_view> speakers;
    for (const auto& t : turns) speakers.insert(t.speaker_id);
    return speakers.size();
  }

  /// Empty-text turns are kept for provenance; this flags the record.
  bool is_degenerate() const {
    return std::any_of(turns.begin(), turns.end(), [](const Turn& t) { return t.text.empty(); });
  }
};

/// Plain-text unit flowing into mixing and packing.
struct Document {
  std::string doc_id;
  std::string source;
  std::string text;
  std::uint64_t token_count = 0;

  bool operator==(const Document&) const = default;
};

/// Throws schema-violation (or encoding-error) if `t` breaks an invariant.
inline void validate(const Transcript& t) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::schema_violation, "transcript '" + t.id + "': " + what);
  };
  if (t.id.empty()) fail("empty id");
  if (!(t.duration_s >= 0.0)) fail("negative or NaN duration_s");
  if (t.turns.empty()) fail("no turns");
  std::int64_t previous = 0;
  for (std::size_t i = 0; i < t.turns.size(); ++i) {
    const Turn& turn = t.turns[i];
    if (turn.start_ms < 0) fail("negative start_ms at turn " + std::to_string(i));
    if (turn.start_ms < previous) fail("turns out of time order at turn " + std::to_string(i));
    previous = turn.start_ms;
    if (!utf8::is_valid(turn.text) || !utf8::is_valid(turn.speaker_id)) {
      throw Error(ErrorKind::encoding_error, "transcript '" + t.id + "': invalid UTF-8 in turn " + std::to_string(i));
    }
  }
  if (t.duration_s * 1000.0 < static_cast<double>(previous)) fail("duration_s below last turn start");
}

namespace detail {

using ordered_json = nlohmann::ordered_json;

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::schema_violation, ctx + ": missing field '" + key + "'");
  return *it;
}

inline std::string require_string(const nlohmann::json& obj, const char* key, const std::string& ctx) {
  const auto& v = require(obj, key, ctx);
  if (!v.is_string()) throw Error(ErrorKind::schema_violation, ctx + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

inline nlohmann::json parse_object(std::string_view line, const char* what) {
  if (!utf8::is_valid(line)) throw Error(ErrorKind::encoding_error, std::string(what) + " is not valid UTF-8");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::malformed_record, std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::schema_violation, std::string(what) + " is not a JSON object");
  return j;
}

}  // namespace detail

/// Parses one input record (one JSON object per line) and checks every
/// Transcript invariant.
inline Transcript parse_transcript(std::string_view line) {
  const nlohmann::json j = detail::parse_object(line, "transcript record");
  Transcript t;
  std::string ctx = "transcript record";
  t.id = detail::require_string(j, "id", ctx);
  ctx = "transcript '" + t.id + "'";
  t.org_id = detail::require_string(j, "org_id", ctx);
  t.language = detail::require_string(j, "language", ctx);
  const auto& duration = detail::require(j, "duration_s", ctx);
  if (!duration.is_number()) throw Error(ErrorKind::schema_violation, ctx + ": duration_s must be a number");
  t.duration_s = duration.get<double>();
  const auto& turns = detail::require(j, "turns", ctx);
  if (!turns.is_array()) throw Error(ErrorKind::schema_violation, ctx + ": turns must be an array");
  t.turns.reserve(turns.size());
  for (const auto& jt : turns) {
    if (!jt.is_object()) throw Error(ErrorKind::schema_violation, ctx + ": turn must be an object");
    Turn turn;
    turn.speaker_id = detail::require_string(jt, "speaker", ctx);
    const auto& start = detail::require(jt, "start_ms", ctx);
    if (!start.is_number_integer()) throw Error(ErrorKind::schema_violation, ctx + ": start_ms must be an integer");
    turn.start_ms = start.get<std::int64_t>();
    turn.text = detail::require_string(jt, "text", ctx);
    t.turns.push_back(std::move(turn));
  }
  validate(t);
  return t;
}

inline std::string serialize(const Transcript& t) {
  detail::ordered_json j;
  j["id"] = t.id;
  j["org_id"] = t.org_id;
  j["language"] = t.language;
  j["duration_s"] = t.duration_s;
  auto turns = detail::ordered_json::array();
  for (const auto& turn : t.turns) {
    detail::ordered_json jt;
    jt["speaker"] = turn.speaker_id;
    jt["start_ms"] = turn.start_ms;
    jt["text"] = turn.text;
    turns.push_back(std::move(jt));
  }
  j["turns"] = std::move(turns);
  return j.dump();
}

/// Parses a Document record. A missing token_count is reported as
/// std::nullopt-equivalent via `has_token_count` so callers can recount.
inline Document parse_document(std::string_view line, bool* has_token_count = nullptr) {
  const nlohmann::json j = detail::parse_object(line, "document record");
  Document d;
  const std::string ctx = "document record";
  d.doc_id = detail::require_string(j, "doc_id", ctx);
  d.text = detail::require_string(j, "text", ctx);
  if (auto it = j.find("source"); it != j.end()) {
    if (!it->is_string()) throw Error(ErrorKind::schema_violation, ctx + ": source must be a string");
    d.source = it->get<std::string>();
  }
  auto tc = j.find("token_count");
  if (has_token_count) *has_token_count = tc != j.end();
  if (tc != j.end()) {
    if (!tc->is_number_unsigned() && !(tc->is_number_integer() && tc->get<std::int64_t>() >= 0)) {
      throw Error(ErrorKind::schema_violation, ctx + " '" + d.doc_id + "': token_count must be a non-negative integer");
    }
    d.token_count = tc->get<std::uint64_t>();
  }
  return d;
}

inline std::string serialize(const Document& d) {
  detail::ordered_json j;
  j["doc_id"] = d.doc_id;
  j["source"] = d.source;
  j["text"] = d.text;
  j["token_count"] = d.token_count;
  return j.dump();
}

}  // namespace dacp
