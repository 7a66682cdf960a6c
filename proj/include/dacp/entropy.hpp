#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

/// Shannon entropy (nats) of the empirical distribution over a token
/// multiset, H = -sum_t p(t) ln p(t). Counts are summed in sorted order so
/// the result is independent of hash-table iteration order.
inline double entropy_from_counts(std::vector<std::uint64_t> counts) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) return 0.0;
  std::sort(counts.begin(), counts.end());
  const double n = static_cast<double>(total);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h < 0.0 ? 0.0 : h;
}

struct EntropyScore {
  double entropy_nats = 0.0;
  std::uint64_t token_count = 0;
  std::uint64_t type_count = 0;
};

inline EntropyScore score_text(std::string_view text, const Tokenizer& tok) {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& span : tok.spans(text)) {
    ++counts[tok.token_text(text, span)];
    ++total;
  }
  if (total == 0) throw Error(ErrorKind::empty_document, "text yields zero tokens");
  std::vector<std::uint64_t> values;
  values.reserve(counts.size());
  for (const auto& [_, c] : counts) values.push_back(c);
  return {entropy_from_counts(std::move(values)), total, counts.size()};
}

/// Token-type entropy in nats; throws empty-document on zero tokens.
inline double token_type_entropy(std::string_view text, const Tokenizer& tok) {
  return score_text(text, tok).entropy_nats;
}

struct SelectionRecord {
  std::string id;
  double entropy_nats = 0.0;
  std::uint64_t token_count = 0;

  bool operator==(const SelectionRecord&) const = default;
};

/// Total order used for selection: higher entropy first, then ascending id.
inline bool ranks_before(const SelectionRecord& a, const SelectionRecord& b) {
  if (a.entropy_nats != b.entropy_nats) return a.entropy_nats > b.entropy_nats;
  return a.id < b.id;
}

/// Bounded top-N over a stream. Keeps at most n records in a heap whose top
/// is the current worst kept record. Per-worker selectors can be merged; the
/// result never depends on arrival order because the ranking is total.
class TopNSelector {
 public:
  explicit TopNSelector(std::size_t n) : n_(n) {
    if (n_ == 0) throw Error(ErrorKind::config_invalid, "select n must be >= 1");
  }

  void offer(SelectionRecord r) {
    if (heap_.size() < n_) {
      heap_.push(std::move(r));
    } else if (ranks_before(r, heap_.top())) {
      heap_.pop();
      heap_.push(std::move(r));
    }
  }

  void merge(TopNSelector&& other) {
    while (!other.heap_.empty()) {
      offer(other.heap_.top());
      other.heap_.pop();
    }
  }

  std::size_t size() const { return heap_.size(); }

  /// Best first.
  std::vector<SelectionRecord> finish() && {
    std::vector<SelectionRecord> out;
    out.reserve(heap_.size());
    for (; !heap_.empty(); heap_.pop()) out.push_back(heap_.top());
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  struct WorseOnTop {
    bool operator()(const SelectionRecord& a, const SelectionRecord& b) const { return ranks_before(a, b); }
  };

  std::size_t n_;
  std::priority_queue<SelectionRecord, std::vector<SelectionRecord>, WorseOnTop> heap_;
};

inline std::vector<SelectionRecord> select_top_n(const std::vector<SelectionRecord>& records, std::size_t n) {
  TopNSelector sel(n);
  for (const auto& r : records) sel.offer(r);
  return std::move(sel).finish();
}

inline std::string serialize(const SelectionRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["entropy_nats"] = r.entropy_nats;
  j["token_count"] = r.token_count;
  return j.dump();
}

inline SelectionRecord parse_selection_record(std::string_view line) {
  const auto j = detail::parse_object(line, "score record");
  SelectionRecord r;
  r.id = detail::require_string(j, "id", "score record");
  const auto& h = detail::require(j, "entropy_nats", "score record");
  const auto& n = detail::require(j, "token_count", "score record");
  if (!h.is_number() || !n.is_number_integer()) {
    throw Error(ErrorKind::schema_violation, "score record '" + r.id + "': bad field types");
  }
  r.entropy_nats = h.get<double>();
  r.token_count = n.get<std::uint64_t>();
  if (!(r.entropy_nats >= 0.0)) throw Error(ErrorKind::schema_violation, "score record '" + r.id + "': negative entropy");
  return r;
}

}  // namespace dacp
