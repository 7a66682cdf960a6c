#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dacp/tokenizer.hpp"

namespace dacp::eval {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeScore {
  Prf r1;
  Prf r2;
  Prf rl;
};

inline Prf make_prf(std::uint64_t hits, std::uint64_t candidate_total, std::uint64_t reference_total) {
  Prf s;
  if (candidate_total > 0) s.precision = static_cast<double>(hits) / static_cast<double>(candidate_total);
  if (reference_total > 0) s.recall = static_cast<double>(hits) / static_cast<double>(reference_total);
  if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  return s;
}

inline std::vector<std::string> rouge_tokens(std::string_view text) { return Tokenizer::word().tokenize(text); }

namespace detail {

inline std::map<std::vector<std::string>, std::uint64_t> ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::uint64_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

/// Positions in `ref` of one LCS with `cand`, using the standard backtrack
/// (prefer the match, then the larger of up/left, ties go left).
inline std::vector<std::size_t> lcs_positions(const std::vector<std::string>& ref, const std::vector<std::string>& cand) {
  const std::size_t m = ref.size(), n = cand.size();
  std::vector<std::vector<std::uint32_t>> table(m + 1, std::vector<std::uint32_t>(n + 1, 0));
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      table[i][j] = ref[i - 1] == cand[j - 1] ? table[i - 1][j - 1] + 1 : std::max(table[i - 1][j], table[i][j - 1]);
    }
  }
  std::vector<std::size_t> hits;
  std::size_t i = m, j = n;
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      hits.push_back(i - 1);
      --i;
      --j;
    } else if (table[i - 1][j] > table[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(hits.begin(), hits.end());
  return hits;
}

inline std::vector<std::vector<std::string>> sentences(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto toks = rouge_tokens(text.substr(start, nl - start));
    if (!toks.empty()) out.push_back(std::move(toks));
    start = nl + 1;
  }
  return out;
}

}  // namespace detail

/// ROUGE-N from clipped n-gram overlap.
inline Prf rouge_n(const std::vector<std::string>& cand, const std::vector<std::string>& ref, std::size_t n) {
  const auto cc = detail::ngram_counts(cand, n);
  const auto rc = detail::ngram_counts(ref, n);
  std::uint64_t overlap = 0, ctotal = 0, rtotal = 0;
  for (const auto& [g, c] : cc) {
    ctotal += c;
    if (auto it = rc.find(g); it != rc.end()) overlap += std::min(c, it->second);
  }
  for (const auto& [_, c] : rc) rtotal += c;
  return make_prf(overlap, ctotal, rtotal);
}

/// Summary-level ROUGE-L: texts are split into sentences on newlines; for
/// each reference sentence the union of its LCS hits against every candidate
/// sentence is counted, clipped by the remaining token counts on both sides.
/// With one sentence per side this reduces to plain LCS.
inline Prf rouge_lsum(std::string_view candidate, std::string_view reference) {
  const auto cand_sents = detail::sentences(candidate);
  const auto ref_sents = detail::sentences(reference);
  std::map<std::string, std::uint64_t> cand_counts, ref_counts;
  std::uint64_t cand_total = 0, ref_total = 0;
  for (const auto& s : cand_sents) {
    for (const auto& t : s) ++cand_counts[t], ++cand_total;
  }
  for (const auto& s : ref_sents) {
    for (const auto& t : s) ++ref_counts[t], ++ref_total;
  }
  std::uint64_t hits = 0;
  for (const auto& r : ref_sents) {
    std::set<std::size_t> united;
    for (const auto& c : cand_sents) {
      for (auto pos : detail::lcs_positions(r, c)) united.insert(pos);
    }
    for (auto pos : united) {
      const std::string& tok = r[pos];
      if (cand_counts[tok] > 0 && ref_counts[tok] > 0) {
        ++hits;
        --cand_counts[tok];
        --ref_counts[tok];
      }
    }
  }
  return make_prf(hits, cand_total, ref_total);
}

/// Tokens are lowercased and split on non-alphanumeric runs; no stemming or
/// stopword removal. Empty inputs yield zeros.
inline RougeScore rouge(std::string_view candidate, std::string_view reference) {
  const auto c = rouge_tokens(candidate);
  const auto r = rouge_tokens(reference);
  return {rouge_n(c, r, 1), rouge_n(c, r, 2), rouge_lsum(candidate, reference)};
}

}  // namespace dacp::eval
