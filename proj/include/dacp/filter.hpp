#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dacp/hash.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

struct EligibilityRule {
  double min_duration_s = 120.0;
  std::size_t min_speakers = 2;
  std::set<std::string> allowed_languages{"en"};
  bool drop_degenerate = false;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(min_duration_s >= 0.0)) v.push_back("min_duration_s must be >= 0");
    if (min_speakers < 1) v.push_back("min_speakers must be >= 1");
    if (allowed_languages.empty()) v.push_back("allowed_languages must be nonempty");
    return v;
  }
};

enum class RejectReason { duration, speakers, language, degenerate };

constexpr std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::duration: return "duration";
    case RejectReason::speakers: return "speakers";
    case RejectReason::language: return "language";
    case RejectReason::degenerate: return "degenerate";
  }
  return "unknown";
}

/// First failing check, in the order duration, speakers, language,
/// degenerate; nullopt when eligible. The duration bound is inclusive.
inline std::optional<RejectReason> rejection_reason(const Transcript& t, const EligibilityRule& r) {
  if (!(t.duration_s >= r.min_duration_s)) return RejectReason::duration;
  if (t.distinct_speaker_count() < r.min_speakers) return RejectReason::speakers;
  if (!r.allowed_languages.count(t.language)) return RejectReason::language;
  if (r.drop_degenerate && t.is_degenerate()) return RejectReason::degenerate;
  return std::nullopt;
}

inline bool is_eligible(const Transcript& t, const EligibilityRule& r) {
  return !rejection_reason(t, r).has_value();
}

struct DiversityConfig {
  std::optional<std::size_t> per_org_cap;  // nullopt: unlimited
  std::size_t target_pool_size = 1;
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (target_pool_size < 1) v.push_back("target_pool_size must be >= 1");
    if (per_org_cap && *per_org_cap < 1) v.push_back("per_org_cap must be positive");
    return v;
  }
};

struct DiversityResult {
  std::vector<std::string> selected_ids;  // ascending sampling key
  std::map<std::string, std::size_t> per_org;
  std::size_t offered = 0;
  std::size_t shortfall = 0;  // target_pool_size - selected, when the pool underflows
};

inline std::uint64_t diversity_key(std::uint64_t seed, std::string_view id) {
  return keyed_hash(seed, {"diversity", id});
}

/// Streaming organization-diversity sampler. Each transcript gets the key
/// hash(seed, id); the selection is the `target_pool_size` smallest keys
/// subject to at most `per_org_cap` per organization. Memory is bounded by
/// (number of orgs) x min(cap, target) entries, and the result depends only
/// on the set of offered (id, org) pairs, not their order or partitioning.
class DiversitySampler {
 public:
  explicit DiversitySampler(DiversityConfig cfg) : cfg_(std::move(cfg)) {
    bound_ = cfg_.target_pool_size;
    if (cfg_.per_org_cap) bound_ = std::min(bound_, *cfg_.per_org_cap);
  }

  void offer(std::string_view id, std::string_view org_id) {
    ++offered_;
    insert(orgs_[std::string(org_id)], Entry{diversity_key(cfg_.seed, id), std::string(id)});
  }

  /// Folds another worker's sampler (same config) into this one.
  void merge(DiversitySampler&& other) {
    offered_ += other.offered_;
    for (auto& [org, heap] : other.orgs_) {
      auto& mine = orgs_[org];
      while (!heap.empty()) {
        insert(mine, heap.top());
        heap.pop();
      }
    }
  }

  DiversityResult finish() const {
    struct Candidate {
      Entry entry;
      const std::string* org;
    };
    std::vector<Candidate> candidates;
    for (const auto& [org, heap] : orgs_) {
      auto copy = heap;
      for (; !copy.empty(); copy.pop()) candidates.push_back({copy.top(), &org});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const Candidate& a, const Candidate& b) { return a.entry < b.entry; });
    DiversityResult result;
    result.offered = offered_;
    const std::size_t take = std::min(candidates.size(), cfg_.target_pool_size);
    for (std::size_t i = 0; i < take; ++i) {
      result.selected_ids.push_back(candidates[i].entry.id);
      ++result.per_org[*candidates[i].org];
    }
    if (take < cfg_.target_pool_size) result.shortfall = cfg_.target_pool_size - take;
    return result;
  }

 private:
  struct Entry {
    std::uint64_t key;
    std::string id;
    bool operator<(const Entry& o) const { return key != o.key ? key < o.key : id < o.id; }
  };
  using MaxHeap = std::priority_queue<Entry>;

  void insert(MaxHeap& heap, Entry e) {
    if (heap.size() < bound_) {
      heap.push(std::move(e));
    } else if (e < heap.top()) {
      heap.pop();
      heap.push(std::move(e));
    }
  }

  DiversityConfig cfg_;
  std::size_t bound_ = 0;
  std::size_t offered_ = 0;
  std::map<std::string, MaxHeap> orgs_;
};

struct DiversitySample {
  std::vector<Transcript> transcripts;  // input order
  DiversityResult result;
};

/// In-memory convenience wrapper: samples and returns the chosen transcripts
/// in their input order.
inline DiversitySample diversity_sample(const std::vector<Transcript>& input, const DiversityConfig& cfg) {
  DiversitySampler sampler(cfg);
  for (const auto& t : input) sampler.offer(t.id, t.org_id);
  DiversitySample out;
  out.result = sampler.finish();
  const std::unordered_set<std::string> chosen(out.result.selected_ids.begin(), out.result.selected_ids.end());
  for (const auto& t : input) {
    if (chosen.count(t.id)) out.transcripts.push_back(t);
  }
  return out;
}

}  // namespace dacp
