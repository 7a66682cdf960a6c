#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

inline constexpr std::uint64_t kDefaultContextLength = 8000;

/// Tokens [begin, end) of one document placed contiguously in a window.
struct DocSpan {
  std::string doc_id;
  std::string source;
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t length() const { return end - begin; }
  bool operator==(const DocSpan&) const = default;
};

struct PackedWindow {
  std::uint64_t window_index = 0;
  std::uint64_t tokens = 0;  // span tokens + one separator between adjacent spans
  std::vector<DocSpan> spans;
  std::vector<std::string> segments;  // per-span source text, when a tokenizer is attached

  bool operator==(const PackedWindow&) const = default;
};

/// Greedy sequential packer. Documents are laid end to end with one
/// separator token between neighbours inside a window; a separator is only
/// placed when at least one token of the next document fits after it, so a
/// window never ends on a separator. Documents longer than the remaining room
/// continue in the next window. The final partial window is emitted unpadded.
/// Zero-token documents contribute nothing.
class Packer {
 public:
  using Sink = std::function<void(PackedWindow&&)>;

  Packer(std::uint64_t context_length, Sink sink, const Tokenizer* tokenizer = nullptr)
      : length_(context_length), sink_(std::move(sink)), tokenizer_(tokenizer) {
    if (length_ < 2) throw Error(ErrorKind::config_invalid, "context length must be >= 2");
  }

  void add(const Document& doc) {
    if (doc.token_count == 0) return;
    std::vector<TokenSpan> token_spans;
    if (tokenizer_) {
      token_spans = tokenizer_->spans(doc.text);
      if (token_spans.size() != doc.token_count) {
        throw Error(ErrorKind::schema_violation, "document '" + doc.doc_id + "': token_count does not match tokenizer");
      }
    }
    if (current_.tokens > 0) {
      if (length_ - current_.tokens >= 2) {
        ++current_.tokens;
        ++separators_;
      } else {
        flush();
      }
    }
    std::uint64_t offset = 0;
    while (offset < doc.token_count) {
      const std::uint64_t take = std::min(doc.token_count - offset, length_ - current_.tokens);
      current_.spans.push_back({doc.doc_id, doc.source, offset, offset + take});
      if (tokenizer_) {
        const auto first = token_spans[offset].begin;
        const auto last = token_spans[offset + take - 1].end;
        current_.segments.push_back(doc.text.substr(first, last - first));
      }
      if (offset > 0) carried_ += take;
      current_.tokens += take;
      offset += take;
      if (current_.tokens == length_) flush();
    }
  }

  void finish() {
    if (current_.tokens > 0) flush();
  }

  std::uint64_t windows() const { return next_index_; }
  std::uint64_t separators() const { return separators_; }
  /// Tokens that landed in a window after their document's first window.
  std::uint64_t carried_tokens() const { return carried_; }

 private:
  void flush() {
    current_.window_index = next_index_++;
    sink_(std::move(current_));
    current_ = PackedWindow{};
  }

  std::uint64_t length_;
  Sink sink_;
  const Tokenizer* tokenizer_;
  PackedWindow current_;
  std::uint64_t next_index_ = 0;
  std::uint64_t separators_ = 0;
  std::uint64_t carried_ = 0;
};

inline std::vector<PackedWindow> pack_windows(const std::vector<Document>& docs, std::uint64_t context_length,
                                              const Tokenizer* tokenizer = nullptr) {
  std::vector<PackedWindow> out;
  Packer packer(context_length, [&](PackedWindow&& w) { out.push_back(std::move(w)); }, tokenizer);
  for (const auto& d : docs) packer.add(d);
  packer.finish();
  return out;
}

inline std::string serialize(const PackedWindow& w) {
  nlohmann::ordered_json j;
  j["window_index"] = w.window_index;
  j["tokens"] = w.tokens;
  auto spans = nlohmann::ordered_json::array();
  for (const auto& s : w.spans) {
    spans.push_back({{"doc_id", s.doc_id}, {"source", s.source}, {"begin", s.begin}, {"end", s.end}});
  }
  j["doc_spans"] = std::move(spans);
  if (!w.segments.empty()) j["segments"] = w.segments;
  return j.dump();
}

inline PackedWindow parse_window(std::string_view line) {
  const auto j = detail::parse_object(line, "window record");
  PackedWindow w;
  try {
    w.window_index = j.at("window_index").get<std::uint64_t>();
    w.tokens = j.at("tokens").get<std::uint64_t>();
    for (const auto& s : j.at("doc_spans")) {
      w.spans.push_back({s.at("doc_id").get<std::string>(), s.at("source").get<std::string>(),
                         s.at("begin").get<std::uint64_t>(), s.at("end").get<std::uint64_t>()});
    }
    if (j.contains("segments")) w.segments = j.at("segments").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_violation, std::string("window record: ") + e.what());
  }
  return w;
}

}  // namespace dacp
