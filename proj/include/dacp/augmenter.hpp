#pragma once

#include <array>
#include <cmath>
#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/hash.hpp"
#include "dacp/render.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

/// Per-field probability weights for format diversification. Index order:
/// tag_style follows TagStyle; timestamps and merge are {false, true};
/// blank_lines is {0, 1, 2}.
struct AugmentPlan {
  std::uint64_t seed = 0;
  std::array<double, 4> tag_style{1.0, 0.0, 0.0, 0.0};
  std::array<double, 2> timestamps{1.0, 0.0};
  std::array<double, 3> blank_lines{1.0, 0.0, 0.0};
  std::array<double, 2> merge_consecutive{1.0, 0.0};
  std::vector<std::string> name_pool;
  std::map<std::string, std::string> roles;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    auto check = [&](std::string_view field, const auto& weights) {
      double sum = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) v.push_back(std::string(field) + ": negative weight");
        sum += w;
      }
      if (std::abs(sum - 1.0) > 1e-9) v.push_back(std::string(field) + ": weights sum ≠ 1");
    };
    check("tag_style", tag_style);
    check("timestamps", timestamps);
    check("blank_lines", blank_lines);
    check("merge_consecutive", merge_consecutive);
    return v;
  }

  static AugmentPlan from_json(const nlohmann::json& j) {
    AugmentPlan p;
    std::vector<std::string> problems;
    p.seed = j.value<std::uint64_t>("seed", 0);
    auto read = [&](const char* field, auto& weights, const std::vector<std::string>& keys) {
      if (!j.contains(field)) return;
      const auto& obj = j.at(field);
      weights.fill(0.0);
      for (const auto& [k, val] : obj.items()) {
        auto pos = std::find(keys.begin(), keys.end(), k);
        if (pos == keys.end() || !val.is_number()) {
          problems.push_back(std::string(field) + ": unknown option '" + k + "'");
          continue;
        }
        weights[static_cast<std::size_t>(pos - keys.begin())] = val.template get<double>();
      }
    };
    read("tag_style", p.tag_style, {"speaker-index", "name", "initials", "role"});
    read("timestamps", p.timestamps, {"false", "true"});
    read("blank_lines", p.blank_lines, {"0", "1", "2"});
    read("merge_consecutive", p.merge_consecutive, {"false", "true"});
    if (j.contains("name_pool")) p.name_pool = j.at("name_pool").get<std::vector<std::string>>();
    if (j.contains("roles")) p.roles = j.at("roles").get<std::map<std::string, std::string>>();
    for (auto& s : p.violations()) problems.push_back(std::move(s));
    if (!problems.empty()) {
      std::string msg = "augment plan invalid:";
      for (const auto& s : problems) msg += "\n  - " + s;
      throw Error(ErrorKind::config_invalid, msg);
    }
    return p;
  }
};

namespace detail {

template <std::size_t N>
std::size_t draw(const std::array<double, N>& weights, std::uint64_t seed, std::string_view field, std::string_view id) {
  const double u = unit_interval(keyed_hash(seed, {"style", field, id}));
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last = i;
    if (u < acc) return i;
  }
  return last;
}

}  // namespace detail

/// Deterministic per-transcript style; each field is drawn independently.
inline RenderStyle choose_style(std::string_view transcript_id, const AugmentPlan& plan) {
  RenderStyle s;
  s.tag_style = static_cast<TagStyle>(detail::draw(plan.tag_style, plan.seed, "tag_style", transcript_id));
  s.timestamps = detail::draw(plan.timestamps, plan.seed, "timestamps", transcript_id) == 1;
  s.blank_lines_between_turns = static_cast<int>(detail::draw(plan.blank_lines, plan.seed, "blank_lines", transcript_id));
  s.merge_consecutive = detail::draw(plan.merge_consecutive, plan.seed, "merge_consecutive", transcript_id) == 1;
  return s;
}

/// Display names are drawn from the plan's pool (distinct per speaker, with
/// a hash-keyed starting offset); without enough pool entries the name-based
/// tags fall back to speaker-index inside render_text.
inline SpeakerLabels speaker_labels(const Transcript& t, const AugmentPlan& plan) {
  SpeakerLabels labels;
  labels.roles = plan.roles;
  std::vector<std::string> order;
  for (const auto& turn : t.turns) {
    if (std::find(order.begin(), order.end(), turn.speaker_id) == order.end()) order.push_back(turn.speaker_id);
  }
  if (!plan.name_pool.empty() && plan.name_pool.size() >= order.size()) {
    const std::size_t offset = static_cast<std::size_t>(keyed_hash(plan.seed, {"names", t.id}) % plan.name_pool.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      labels.names[order[i]] = plan.name_pool[(offset + i) % plan.name_pool.size()];
    }
  }
  return labels;
}

/// Renders an (already anonymized) transcript into an in-domain Document.
inline Document augment(const Transcript& t, const AugmentPlan& plan, const Tokenizer& tok,
                        std::string source = "in_domain") {
  Document d;
  d.doc_id = t.id;
  d.source = std::move(source);
  d.text = render_text(t, choose_style(t.id, plan), speaker_labels(t, plan));
  d.token_count = tok.count(d.text);
  return d;
}

}  // namespace dacp
