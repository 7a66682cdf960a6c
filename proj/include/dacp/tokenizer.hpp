#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"
#include "dacp/utf8.hpp"

namespace dacp {

/// Half-open byte range of one token inside the source string.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Two modes:
///  - word: ASCII letters/digits and any non-ASCII byte form words; every
///    other byte separates. Tokens are ASCII-lowercased.
///  - external-vocab: greedy longest match against a vocabulary; a position
///    matching nothing yields its single UTF-8 code point as a token.
class Tokenizer {
 public:
  enum class Mode { word, external_vocab };

  static Tokenizer word() { return Tokenizer(); }

  static Tokenizer from_vocab(std::vector<std::string> entries) {
    Tokenizer t;
    t.mode_ = Mode::external_vocab;
    auto vocab = std::make_shared<Vocab>();
    Checksum sum;
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    for (auto& e : entries) {
      if (e.empty()) continue;
      sum.update(e);
      sum.update("\n");
      vocab->max_len = std::max(vocab->max_len, e.size());
      vocab->entries.insert(std::move(e));
    }
    t.vocab_ = std::move(vocab);
    t.fingerprint_ = sum.hex();
    return t;
  }

  /// One vocabulary entry per line.
  static Tokenizer from_vocab_file(const std::filesystem::path& path) {
    return from_vocab(io::read_lines(path));
  }

  /// Parses "word" or "vocab:<path>" / "external-vocab:<path>".
  static Tokenizer from_spec(std::string_view spec) {
    if (spec == "word") return word();
    for (std::string_view prefix : {std::string_view("external-vocab:"), std::string_view("vocab:")}) {
      if (spec.starts_with(prefix)) return from_vocab_file(std::string(spec.substr(prefix.size())));
    }
    throw Error(ErrorKind::config_invalid, "unknown tokenizer mode '" + std::string(spec) + "'");
  }

  Mode mode() const { return mode_; }

  /// Stable description recorded in manifests.
  std::string describe() const {
    return mode_ == Mode::word ? std::string("word") : "external-vocab:" + fingerprint_;
  }

  std::vector<TokenSpan> spans(std::string_view text) const {
    return mode_ == Mode::word ? word_spans(text) : vocab_spans(text);
  }

  std::vector<std::string> tokenize(std::string_view text) const {
    std::vector<std::string> out;
    for (const auto& s : spans(text)) out.push_back(token_text(text, s));
    return out;
  }

  std::size_t count(std::string_view text) const {
    if (mode_ == Mode::word) {
      std::size_t n = 0;
      bool in_word = false;
      for (unsigned char c : text) {
        const bool w = is_word_byte(c);
        if (w && !in_word) ++n;
        in_word = w;
      }
      return n;
    }
    return vocab_spans(text).size();
  }

  /// Normalized token text for a span produced by this tokenizer.
  std::string token_text(std::string_view text, TokenSpan s) const {
    std::string tok(text.substr(s.begin, s.end - s.begin));
    if (mode_ == Mode::word) {
      for (auto& c : tok) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      }
    }
    return tok;
  }

  static constexpr bool is_word_byte(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
  }

 private:
  struct Vocab {
    std::unordered_set<std::string> entries;
    std::size_t max_len = 0;
  };

  Tokenizer() = default;

  static std::vector<TokenSpan> word_spans(std::string_view text) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
      while (i < n && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      if (i == n) break;
      const std::size_t begin = i;
      while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back({begin, i});
    }
    return out;
  }

  std::vector<TokenSpan> vocab_spans(std::string_view text) const {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    std::string probe;
    while (i < n) {
      std::size_t match = 0;
      for (std::size_t len = std::min(vocab_->max_len, n - i); len > 0; --len) {
        probe.assign(text.substr(i, len));
        if (vocab_->entries.count(probe)) {
          match = len;
          break;
        }
      }
      if (match == 0) match = std::min(utf8::sequence_length(static_cast<unsigned char>(text[i])), n - i);
      out.push_back({i, i + match});
      i += match;
    }
    return out;
  }

  Mode mode_ = Mode::word;
  std::shared_ptr<const Vocab> vocab_;
  std::string fingerprint_;
};

}  // namespace dacp
