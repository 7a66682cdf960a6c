#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

struct MixtureComponent {
  std::string name;
  std::string source;  // path, directory or glob of Document jsonl files
  double weight = 0.0;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;
  std::uint64_t total_token_budget = 0;
  std::uint64_t seed = 0;

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (components.empty()) v.push_back("mixture needs at least one component");
    if (total_token_budget == 0) v.push_back("total_token_budget must be positive");
    std::set<std::string> names;
    double sum = 0.0;
    for (const auto& c : components) {
      if (c.name.empty()) v.push_back("component with empty name");
      if (!names.insert(c.name).second) v.push_back("duplicate component name '" + c.name + "'");
      if (!(c.weight >= 0.0 && c.weight <= 1.0)) v.push_back("component '" + c.name + "': weight outside [0,1]");
      sum += c.weight;
    }
    if (!components.empty() && std::abs(sum - 1.0) > 1e-9) v.push_back("weights sum ≠ 1");
    return v;
  }

  std::uint64_t allocation(const MixtureComponent& c) const {
    return static_cast<std::uint64_t>(std::llround(c.weight * static_cast<double>(total_token_budget)));
  }

  static MixtureSpec from_json(const nlohmann::json& j) {
    MixtureSpec s;
    s.total_token_budget = j.value<std::uint64_t>("total_token_budget", 0);
    s.seed = j.value<std::uint64_t>("seed", 0);
    if (j.contains("components")) {
      for (const auto& jc : j.at("components")) {
        s.components.push_back({jc.value("name", ""), jc.value("source", ""), jc.value("weight", 0.0)});
      }
    }
    return s;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    auto comps = nlohmann::ordered_json::array();
    for (const auto& c : components) comps.push_back({{"name", c.name}, {"source", c.source}, {"weight", c.weight}});
    j["components"] = std::move(comps);
    j["total_token_budget"] = total_token_budget;
    j["seed"] = seed;
    return j;
  }
};

struct ComponentReport {
  std::uint64_t allocation = 0;
  std::uint64_t available_tokens = 0;
  std::uint64_t tokens = 0;
  std::uint64_t documents = 0;
  std::uint64_t max_document_tokens = 0;
  bool underflow = false;
};

struct MixtureResult {
  std::vector<Document> documents;  // interleaved emission order
  std::map<std::string, ComponentReport> components;

  std::uint64_t total_tokens() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : components) n += c.tokens;
    return n;
  }
};

inline std::uint64_t sampling_key(std::uint64_t seed, std::string_view component, std::string_view doc_id) {
  return keyed_hash(seed, {"sample", component, doc_id});
}

inline std::uint64_t interleave_key(std::uint64_t seed, std::string_view component, std::string_view doc_id) {
  return keyed_hash(seed, {"interleave", component, doc_id});
}

/// Budgeted mixing. For each component, documents are visited in ascending
/// hash(seed, component, doc_id) order (uniform sampling without
/// replacement) and taken while the running total stays within
/// round(weight x budget); the first document that would overflow ends the
/// component. Hence each component lands within one maximum document length
/// below its allocation and the total never exceeds the budget. The selected
/// documents are then interleaved by a second seeded key.
inline MixtureResult build_mixture(const MixtureSpec& spec, const std::map<std::string, std::vector<Document>>& sources) {
  if (auto v = spec.violations(); !v.empty()) throw Error(ErrorKind::config_invalid, "mixture spec: " + v.front());
  MixtureResult result;
  struct Keyed {
    std::uint64_t key;
    const Document* doc;
  };
  std::vector<Keyed> chosen;

  for (const auto& comp : spec.components) {
    auto it = sources.find(comp.name);
    if (it == sources.end() || it->second.empty()) {
      throw Error(ErrorKind::empty_component, "component '" + comp.name + "' has no documents");
    }
    ComponentReport report;
    report.allocation = spec.allocation(comp);
    std::vector<Keyed> order;
    order.reserve(it->second.size());
    std::set<std::string_view> ids;
    for (const auto& d : it->second) {
      if (!ids.insert(d.doc_id).second) {
        throw Error(ErrorKind::schema_violation, "component '" + comp.name + "': duplicate doc_id '" + d.doc_id + "'");
      }
      report.available_tokens += d.token_count;
      report.max_document_tokens = std::max(report.max_document_tokens, d.token_count);
      order.push_back({sampling_key(spec.seed, comp.name, d.doc_id), &d});
    }
    std::sort(order.begin(), order.end(), [](const Keyed& a, const Keyed& b) {
      return a.key != b.key ? a.key < b.key : a.doc->doc_id < b.doc->doc_id;
    });
    for (const auto& k : order) {
      if (report.tokens + k.doc->token_count > report.allocation) break;
      report.tokens += k.doc->token_count;
      ++report.documents;
      chosen.push_back({interleave_key(spec.seed, comp.name, k.doc->doc_id), k.doc});
    }
    report.underflow = report.available_tokens < report.allocation;
    result.components[comp.name] = report;
  }

  std::sort(chosen.begin(), chosen.end(), [](const Keyed& a, const Keyed& b) {
    if (a.key != b.key) return a.key < b.key;
    if (a.doc->source != b.doc->source) return a.doc->source < b.doc->source;
    return a.doc->doc_id < b.doc->doc_id;
  });
  result.documents.reserve(chosen.size());
  for (const auto& k : chosen) result.documents.push_back(*k.doc);
  return result;
}

/// Reads a component's Document files. A missing token_count is computed
/// with `tok`; a present one must match the recount. `source` is set to the
/// component name.
inline std::vector<Document> load_documents(const std::string& glob, const std::string& component, const Tokenizer& tok) {
  std::vector<Document> docs;
  const auto files = io::expand_glob(glob);
  if (files.empty()) throw Error(ErrorKind::io_error, "component '" + component + "': no files match '" + glob + "'");
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t number) {
      bool has_count = false;
      Document d;
      try {
        d = parse_document(line, &has_count);
      } catch (const Error& e) {
        throw Error(e.kind(), f.string() + ":" + std::to_string(number) + ": " + e.what());
      }
      const std::uint64_t counted = tok.count(d.text);
      if (has_count && d.token_count != counted) {
        throw Error(ErrorKind::schema_violation, "document '" + d.doc_id + "': token_count " +
                                                     std::to_string(d.token_count) + " != tokenizer count " +
                                                     std::to_string(counted));
      }
      d.token_count = counted;
      d.source = component;
      docs.push_back(std::move(d));
    });
  }
  return docs;
}

}  // namespace dacp
