#pragma once

// Seeded synthetic corpora: call-center style transcripts with planted
// personal information, and plain replay documents. Used by the test suites
// and the demo data generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "dacp/io.hpp"
#include "dacp/transcript.hpp"

namespace dacp::synthetic {

inline const std::vector<std::string>& vocabulary() {
  static const std::vector<std::string> w = {
      "account", "billing", "refund", "call",  "order",   "ticket", "agent", "please", "thanks", "hello",
      "issue",   "payment", "card",   "plan",  "upgrade", "cancel", "email", "number", "today",  "later",
      "router",  "reset",   "policy", "claim", "address", "delay",  "check", "status", "update", "confirm"};
  return w;
}

inline const std::vector<std::string>& person_names() {
  static const std::vector<std::string> n = {"Jordan", "Sam",   "Alex",  "Riley", "Casey",
                                             "Morgan", "Taylor", "Quinn", "Avery", "Drew"};
  return n;
}

inline std::string sentence(std::mt19937_64& rng, int min_words = 1, int max_words = 12) {
  std::uniform_int_distribution<int> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> pick(0, vocabulary().size() - 1);
  std::string out;
  const int n = len(rng);
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += vocabulary()[pick(rng)];
  }
  return out;
}

inline std::string phone_number(std::mt19937_64& rng) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d-%03d-%04d", 200 + static_cast<int>(rng() % 800), static_cast<int>(rng() % 1000),
                static_cast<int>(rng() % 10000));
  return buf;
}

struct TranscriptShape {
  int min_turns = 1;
  int max_turns = 12;
  int max_speakers = 4;
  double min_duration = 60.0;
  double max_duration = 900.0;
  std::vector<std::string> languages{"en"};
  int orgs = 10;
  double pii_rate = 0.0;  // chance that a turn mentions a name or phone number
};

inline Transcript transcript(std::mt19937_64& rng, const std::string& id, const TranscriptShape& g = {}) {
  Transcript t;
  t.id = id;
  t.org_id = "org-" + std::to_string(std::uniform_int_distribution<int>(0, g.orgs - 1)(rng));
  t.language = g.languages[std::uniform_int_distribution<std::size_t>(0, g.languages.size() - 1)(rng)];
  t.duration_s = std::round(std::uniform_real_distribution<double>(g.min_duration, g.max_duration)(rng) * 10.0) / 10.0;
  const int turns = std::uniform_int_distribution<int>(g.min_turns, g.max_turns)(rng);
  const auto span_ms = static_cast<std::int64_t>(t.duration_s * 1000.0);
  std::vector<std::int64_t> starts;
  for (int i = 0; i < turns; ++i) starts.push_back(std::uniform_int_distribution<std::int64_t>(0, span_ms)(rng));
  std::sort(starts.begin(), starts.end());
  std::uniform_int_distribution<int> speaker(1, g.max_speakers);
  std::bernoulli_distribution pii(g.pii_rate);
  for (int i = 0; i < turns; ++i) {
    std::string text = sentence(rng);
    if (pii(rng)) {
      text += rng() % 2 ? " this is " + person_names()[rng() % person_names().size()]
                        : " call me at " + phone_number(rng);
    }
    t.turns.push_back(Turn{"spk" + std::to_string(speaker(rng)), starts[static_cast<std::size_t>(i)], std::move(text)});
  }
  return t;
}

inline std::vector<Transcript> corpus(std::size_t n, std::uint64_t seed, const TranscriptShape& g = {}) {
  std::mt19937_64 rng(seed);
  std::vector<Transcript> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "t%06zu", i);
    out.push_back(transcript(rng, id, g));
  }
  return out;
}

/// Replay documents without token counts; loaders fill them in.
inline std::vector<Document> replay_documents(std::size_t n, std::uint64_t seed, int min_words = 20, int max_words = 200) {
  std::mt19937_64 rng(seed);
  std::vector<Document> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "replay-%06zu", i);
    std::string text;
    for (int words = 0, target = std::uniform_int_distribution<int>(min_words, max_words)(rng); words < target;) {
      std::string s = sentence(rng, 4, 16);
      words += static_cast<int>(std::count(s.begin(), s.end(), ' ')) + 1;
      text += (text.empty() ? "" : ". ") + s;
    }
    out.push_back({id, "replay", std::move(text), 0});
  }
  return out;
}

struct DemoData {
  std::filesystem::path transcripts;  // jsonl of Transcript records
  std::filesystem::path replay;       // jsonl of Document records
};

/// Writes `<dir>/transcripts/part-000.jsonl` and `<dir>/replay/part-000.jsonl`.
inline DemoData write_demo_data(const std::filesystem::path& dir, std::size_t transcripts, std::size_t replay,
                                std::uint64_t seed, const TranscriptShape& shape = {}) {
  DemoData d{dir / "transcripts" / "part-000.jsonl", dir / "replay" / "part-000.jsonl"};
  std::filesystem::create_directories(d.transcripts.parent_path());
  std::filesystem::create_directories(d.replay.parent_path());
  {
    io::AtomicWriter w(d.transcripts);
    for (const auto& t : corpus(transcripts, seed, shape)) w.write_line(serialize(t));
    w.commit();
  }
  io::AtomicWriter w(d.replay);
  // Raw corpora carry no token_count; the mix stage counts with its tokenizer.
  for (const auto& doc : replay_documents(replay, seed ^ 0x9e3779b97f4a7c15ULL)) {
    w.write_line(nlohmann::ordered_json{{"doc_id", doc.doc_id}, {"source", doc.source}, {"text", doc.text}}.dump());
  }
  w.commit();
  return d;
}

}  // namespace dacp::synthetic
