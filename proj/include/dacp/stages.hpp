#pragma once

// File-to-file pipeline stages. Each stage reads the previous stage's files,
// writes its own atomically and drops a "<file>.meta.json" sidecar carrying
// the config hash, so provenance can be checked downstream.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/anonymizer.hpp"
#include "dacp/augmenter.hpp"
#include "dacp/entropy.hpp"
#include "dacp/error.hpp"
#include "dacp/filter.hpp"
#include "dacp/io.hpp"
#include "dacp/mixture.hpp"
#include "dacp/packing.hpp"
#include "dacp/parallel.hpp"
#include "dacp/render.hpp"
#include "dacp/shards.hpp"
#include "dacp/tokenizer.hpp"
#include "dacp/transcript.hpp"

namespace dacp {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct StageContext {
  std::uint64_t seed = 0;  // already derived for the stage
  std::size_t workers = 1;
  std::string config_hash;
};

inline constexpr std::size_t kChunkLines = 4096;
inline constexpr std::uint64_t kDefaultDocumentShardSize = 10000;
inline constexpr std::uint64_t kDefaultWindowShardSize = 1000;

// ---------------------------------------------------------------------------
// provenance sidecars

inline fs::path meta_path(const fs::path& artifact) { return artifact.string() + ".meta.json"; }

inline void write_meta(const fs::path& artifact, std::string_view stage, const std::string& config_hash,
                       std::uint64_t records, ojson extra = ojson::object()) {
  ojson j;
  j["stage"] = stage;
  j["config_hash"] = config_hash;
  j["records"] = records;
  j["checksum"] = file_checksum(artifact);
  for (auto& [k, v] : extra.items()) j[k] = v;
  io::write_file(meta_path(artifact), j.dump(2) + "\n");
}

inline std::optional<std::string> artifact_config_hash(const fs::path& artifact) {
  const fs::path meta = meta_path(artifact);
  fs::path manifest = fs::is_directory(artifact) ? artifact / "manifest.json" : fs::path();
  for (const fs::path& p : {meta, manifest}) {
    std::error_code ec;
    if (p.empty() || !fs::is_regular_file(p, ec)) continue;
    try {
      const auto j = nlohmann::json::parse(io::read_file(p));
      if (j.contains("config_hash")) return j.at("config_hash").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw Error(ErrorKind::provenance_mismatch, "unreadable provenance file " + p.string());
    }
  }
  return std::nullopt;
}

/// Inputs produced under different configurations must not be combined.
/// Files without provenance (raw corpora) are accepted.
inline void check_provenance(const std::vector<fs::path>& inputs) {
  std::set<std::string> hashes;
  for (const auto& f : inputs) {
    if (auto h = artifact_config_hash(f)) hashes.insert(*h);
  }
  if (hashes.size() > 1) {
    std::string msg = "inputs carry different config hashes:";
    for (const auto& h : hashes) msg += " " + h;
    throw Error(ErrorKind::provenance_mismatch, msg);
  }
}

inline std::vector<fs::path> require_inputs(const std::string& glob) {
  auto files = io::expand_glob(glob);
  if (files.empty()) throw Error(ErrorKind::io_error, "no input files match '" + glob + "'");
  check_provenance(files);
  return files;
}

/// Streams every line of `files` in order, mapping chunks in parallel and
/// consuming results sequentially in input order.
template <typename MapFn, typename ConsumeFn>
void process_lines(const std::vector<fs::path>& files, std::size_t workers, MapFn&& map, ConsumeFn&& consume) {
  std::vector<std::string> chunk;
  auto flush = [&] {
    auto results = parallel_map(chunk, workers, map);
    for (auto& r : results) consume(r);
    chunk.clear();
  };
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) {
      chunk.emplace_back(line);
      if (chunk.size() == kChunkLines) flush();
    });
  }
  if (!chunk.empty()) flush();
}

/// A parsed record or the typed error that rejected it.
struct ParsedTranscript {
  std::optional<Transcript> transcript;
  std::optional<ErrorKind> error;
};

inline ParsedTranscript try_parse(const std::string& line) {
  try {
    return {parse_transcript(line), std::nullopt};
  } catch (const Error& e) {
    return {std::nullopt, e.kind()};
  }
}

// ---------------------------------------------------------------------------
// filter

struct FilterOptions {
  EligibilityRule rule;
  DiversityConfig diversity;

  static FilterOptions from_json(const nlohmann::json& j, std::vector<std::string>& problems) {
    FilterOptions o;
    try {
      o.rule.min_duration_s = j.value("min_duration_s", 120.0);
      const auto min_speakers = j.value<std::int64_t>("min_speakers", 2);
      if (min_speakers < 1) problems.push_back("filter.min_speakers must be >= 1");
      o.rule.min_speakers = static_cast<std::size_t>(std::max<std::int64_t>(min_speakers, 1));
      if (j.contains("allowed_languages")) {
        const auto langs = j.at("allowed_languages").get<std::vector<std::string>>();
        o.rule.allowed_languages = {langs.begin(), langs.end()};
      }
      o.rule.drop_degenerate = j.value("drop_degenerate", false);
      if (j.contains("per_org_cap") && !j.at("per_org_cap").is_null()) {
        const auto cap = j.at("per_org_cap").get<std::int64_t>();
        if (cap < 1) problems.push_back("filter.per_org_cap must be positive or null");
        else o.diversity.per_org_cap = static_cast<std::size_t>(cap);
      }
      const auto target = j.value<std::int64_t>("target_pool_size", 0);
      if (target < 1) problems.push_back("filter.target_pool_size must be >= 1");
      else o.diversity.target_pool_size = static_cast<std::size_t>(target);
    } catch (const nlohmann::json::exception& e) {
      problems.push_back(std::string("filter: ") + e.what());
    }
    for (auto& v : o.rule.violations()) problems.push_back("filter." + v);
    return o;
  }
};

struct FilterReport {
  std::uint64_t input_records = 0;
  std::map<std::string, std::uint64_t> parse_errors;
  std::map<std::string, std::uint64_t> rejected;
  std::uint64_t duplicates = 0;
  std::uint64_t eligible = 0;
  DiversityResult sample;
};

inline FilterReport run_filter(const std::string& in_glob, FilterOptions opts, const fs::path& out,
                               const fs::path& report_path, const StageContext& ctx) {
  const auto files = require_inputs(in_glob);
  opts.diversity.seed = ctx.seed;
  FilterReport report;
  DiversitySampler sampler(opts.diversity);
  std::unordered_set<std::string> seen;

  struct Verdict {
    ParsedTranscript parsed;
    std::optional<RejectReason> reason;
  };
  process_lines(
      files, ctx.workers,
      [&](const std::string& line) {
        Verdict v{try_parse(line), std::nullopt};
        if (v.parsed.transcript) v.reason = rejection_reason(*v.parsed.transcript, opts.rule);
        return v;
      },
      [&](Verdict& v) {
        ++report.input_records;
        if (v.parsed.error) {
          ++report.parse_errors[std::string(to_string(*v.parsed.error))];
          return;
        }
        const Transcript& t = *v.parsed.transcript;
        if (!seen.insert(t.id).second) {
          ++report.duplicates;
          return;
        }
        if (v.reason) {
          ++report.rejected[std::string(to_string(*v.reason))];
          return;
        }
        ++report.eligible;
        sampler.offer(t.id, t.org_id);
      });
  report.sample = sampler.finish();

  std::unordered_set<std::string> chosen(report.sample.selected_ids.begin(), report.sample.selected_ids.end());
  io::AtomicWriter writer(out);
  std::uint64_t written = 0;
  process_lines(
      files, ctx.workers, [](const std::string& line) { return try_parse(line); },
      [&](ParsedTranscript& p) {
        if (!p.transcript) return;
        auto it = chosen.find(p.transcript->id);
        if (it == chosen.end()) return;
        chosen.erase(it);  // first occurrence only
        writer.write_line(serialize(*p.transcript));
        ++written;
      });
  writer.commit();
  write_meta(out, "filter", ctx.config_hash, written);

  ojson j;
  j["config_hash"] = ctx.config_hash;
  j["input_records"] = report.input_records;
  j["parse_errors"] = report.parse_errors;
  j["duplicate_ids"] = report.duplicates;
  ojson rejected = ojson::object();
  for (auto r : {RejectReason::duration, RejectReason::speakers, RejectReason::language, RejectReason::degenerate}) {
    const std::string key(to_string(r));
    rejected[key] = report.rejected.count(key) ? report.rejected.at(key) : 0;
  }
  j["rejected"] = rejected;
  j["eligible"] = report.eligible;
  j["target_pool_size"] = opts.diversity.target_pool_size;
  j["per_org_cap"] = opts.diversity.per_org_cap ? ojson(*opts.diversity.per_org_cap) : ojson(nullptr);
  j["selected"] = report.sample.selected_ids.size();
  j["shortfall"] = report.sample.shortfall;
  j["warnings"] = report.sample.shortfall > 0 ? ojson::array({"pool-underflow"}) : ojson::array();
  j["per_org_accepted"] = report.sample.per_org;
  io::write_file(report_path, j.dump(2) + "\n");
  return report;
}

// ---------------------------------------------------------------------------
// score / select

struct ScoreSummary {
  std::uint64_t scored = 0;
  std::uint64_t empty_documents = 0;
  std::uint64_t parse_errors = 0;
};

/// Scores the plain speaker-index rendering of each transcript.
inline ScoreSummary run_score(const std::string& in_glob, const Tokenizer& tok, const fs::path& out, const StageContext& ctx) {
  const auto files = require_inputs(in_glob);
  ScoreSummary summary;
  io::AtomicWriter writer(out);
  struct Scored {
    std::optional<SelectionRecord> record;
    std::optional<ErrorKind> error;
  };
  process_lines(
      files, ctx.workers,
      [&](const std::string& line) -> Scored {
        auto parsed = try_parse(line);
        if (!parsed.transcript) return {std::nullopt, parsed.error};
        try {
          const auto s = score_text(render_text(*parsed.transcript, RenderStyle{}), tok);
          return {SelectionRecord{parsed.transcript->id, s.entropy_nats, s.token_count}, std::nullopt};
        } catch (const Error& e) {
          return {std::nullopt, e.kind()};
        }
      },
      [&](Scored& s) {
        if (s.record) {
          writer.write_line(serialize(*s.record));
          ++summary.scored;
        } else if (s.error == ErrorKind::empty_document) {
          ++summary.empty_documents;
        } else {
          ++summary.parse_errors;
        }
      });
  writer.commit();
  write_meta(out, "score", ctx.config_hash, summary.scored,
             {{"tokenizer", tok.describe()}, {"empty_documents", summary.empty_documents}, {"parse_errors", summary.parse_errors}});
  return summary;
}

inline std::vector<SelectionRecord> run_select(const std::string& scores_glob, std::size_t n, const fs::path& out,
                                               const StageContext& ctx) {
  const auto files = require_inputs(scores_glob);
  TopNSelector selector(n);
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) { selector.offer(parse_selection_record(line)); });
  }
  auto selected = std::move(selector).finish();
  io::AtomicWriter writer(out);
  for (const auto& r : selected) writer.write_line(r.id);
  writer.commit();
  write_meta(out, "select", ctx.config_hash, selected.size(), {{"n", n}});
  return selected;
}

// ---------------------------------------------------------------------------
// anonymize / augment

inline std::unordered_set<std::string> read_id_set(const fs::path& ids) {
  const auto lines = io::read_lines(ids);
  return {lines.begin(), lines.end()};
}

inline AuditCounts run_anonymize(const std::string& in_glob, const AnonymizationPolicy& policy, const fs::path& out,
                                 const fs::path& audit_path, const std::optional<fs::path>& ids, const StageContext& ctx) {
  auto files = require_inputs(in_glob);
  if (ids) {
    auto all = files;
    all.push_back(*ids);
    check_provenance(all);
  }
  const auto keep = ids ? std::optional(read_id_set(*ids)) : std::nullopt;
  AuditCounts audit;
  std::uint64_t documents = 0;
  io::AtomicWriter writer(out);
  struct Rewritten {
    std::optional<Transcript> transcript;
    AuditCounts counts;
  };
  process_lines(
      files, ctx.workers,
      [&](const std::string& line) -> Rewritten {
        Transcript t = parse_transcript(line);
        if (keep && !keep->count(t.id)) return {};
        Rewritten r;
        r.transcript = anonymize(t, policy, &r.counts);
        return r;
      },
      [&](Rewritten& r) {
        if (!r.transcript) return;
        for (const auto& [type, n] : r.counts) audit[type] += n;
        writer.write_line(serialize(*r.transcript));
        ++documents;
      });
  writer.commit();
  write_meta(out, "anonymize", ctx.config_hash, documents);

  ojson j;
  j["config_hash"] = ctx.config_hash;
  j["documents"] = documents;
  ojson per_type = ojson::object();
  for (const auto& type : policy.info_types) {
    per_type[type.name] = {{"action", policy.action_for(type.name) == AnonymizeAction::mask ? "mask" : "noise"},
                           {"replacements", audit.count(type.name) ? audit.at(type.name) : 0}};
  }
  j["info_types"] = per_type;
  io::write_file(audit_path, j.dump(2) + "\n");
  return audit;
}

inline std::uint64_t run_augment(const std::string& in_glob, const AugmentPlan& plan, const Tokenizer& tok,
                                 const fs::path& out, const StageContext& ctx) {
  const auto files = require_inputs(in_glob);
  std::uint64_t documents = 0;
  io::AtomicWriter writer(out);
  process_lines(
      files, ctx.workers, [&](const std::string& line) { return serialize(augment(parse_transcript(line), plan, tok)); },
      [&](std::string& doc) {
        writer.write_line(doc);
        ++documents;
      });
  writer.commit();
  write_meta(out, "augment", ctx.config_hash, documents, {{"tokenizer", tok.describe()}});
  return documents;
}

// ---------------------------------------------------------------------------
// mix / pack

struct DocumentShardTotals {
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_source;  // tokens, documents
  std::uint64_t documents = 0;
  std::uint64_t tokens = 0;
};

inline std::vector<fs::path> manifest_shards(const fs::path& dir, nlohmann::json* manifest_out = nullptr) {
  const fs::path manifest = dir / "manifest.json";
  std::error_code ec;
  if (!fs::is_regular_file(manifest, ec)) throw Error(ErrorKind::io_error, "missing " + manifest.string());
  const auto j = nlohmann::json::parse(io::read_file(manifest));
  std::vector<fs::path> files;
  for (const auto& s : j.at("shards")) files.push_back(dir / s.at("file").get<std::string>());
  if (manifest_out) *manifest_out = j;
  return files;
}

inline void verify_shard_checksums(const fs::path& dir, const nlohmann::json& manifest) {
  std::vector<ShardInfo> recomputed;
  for (const auto& s : manifest.at("shards")) {
    const auto name = s.at("file").get<std::string>();
    const auto sum = file_checksum(dir / name);
    if (sum != s.at("checksum").get<std::string>()) {
      throw Error(ErrorKind::manifest_mismatch, name + ": checksum differs from manifest");
    }
    recomputed.push_back({name, s.at("records").get<std::uint64_t>(), sum});
  }
  if (content_checksum(recomputed) != manifest.at("content_checksum").get<std::string>()) {
    throw Error(ErrorKind::manifest_mismatch, "content checksum differs from manifest");
  }
}

/// Removes shards and the manifest left by an earlier run into `dir`, and
/// nothing else.
inline void clear_shards(const fs::path& dir, std::string_view prefix) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    const bool shard = name.starts_with(std::string(prefix) + "-") &&
                       (name.ends_with(".jsonl") || name.ends_with(".jsonl.tmp"));
    if (shard || name == "manifest.json" || name == "manifest.json.tmp") fs::remove(entry.path());
  }
}

struct MixSummary {
  MixtureResult mixture;
  std::vector<ShardInfo> shards;
};

inline MixSummary run_mix(const MixtureSpec& spec, const Tokenizer& tok, const fs::path& out_dir, const StageContext& ctx,
                          std::uint64_t shard_size = kDefaultDocumentShardSize) {
  if (auto v = spec.violations(); !v.empty()) {
    std::string msg = "mixture spec invalid:";
    for (const auto& s : v) msg += "\n  - " + s;
    throw Error(ErrorKind::config_invalid, msg);
  }
  MixtureSpec seeded = spec;
  seeded.seed = ctx.seed;
  std::vector<fs::path> all_inputs;
  std::map<std::string, std::vector<Document>> sources;
  for (const auto& c : seeded.components) {
    for (auto& f : io::expand_glob(c.source)) all_inputs.push_back(f);
    sources[c.name] = load_documents(c.source, c.name, tok);
  }
  check_provenance(all_inputs);

  MixSummary summary;
  summary.mixture = build_mixture(seeded, sources);
  clear_shards(out_dir, "documents");
  summary.shards = write_shards(summary.mixture.documents, shard_size, out_dir, "documents");

  const double total = static_cast<double>(summary.mixture.total_tokens());
  ojson j;
  j["kind"] = "mixture";
  j["config_hash"] = ctx.config_hash;
  j["tokenizer"] = tok.describe();
  j["total_token_budget"] = spec.total_token_budget;
  ojson comps = ojson::object(), ratio = ojson::object();
  std::uint64_t max_doc = 0;
  for (const auto& c : seeded.components) {
    const auto& r = summary.mixture.components.at(c.name);
    comps[c.name] = {{"weight", c.weight},
                     {"allocation", r.allocation},
                     {"available_tokens", r.available_tokens},
                     {"tokens", r.tokens},
                     {"documents", r.documents},
                     {"max_document_tokens", r.max_document_tokens},
                     {"underflow", r.underflow}};
    ratio[c.name] = total > 0 ? static_cast<double>(r.tokens) / total : 0.0;
    max_doc = std::max(max_doc, r.max_document_tokens);
  }
  j["components"] = comps;
  j["achieved_ratio"] = ratio;
  j["total_tokens"] = summary.mixture.total_tokens();
  j["documents"] = summary.mixture.documents.size();
  j["max_document_tokens"] = max_doc;
  j["shards"] = to_json(summary.shards);
  j["content_checksum"] = content_checksum(summary.shards);
  io::write_file(out_dir / "manifest.json", j.dump(2) + "\n");

  // Post-write verification: recount the files just written.
  nlohmann::json manifest;
  const auto files = manifest_shards(out_dir, &manifest);
  verify_shard_checksums(out_dir, manifest);
  std::map<std::string, std::uint64_t> tokens;
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) {
      const auto d = parse_document(line);
      tokens[d.source] += d.token_count;
    });
  }
  for (const auto& [name, r] : summary.mixture.components) {
    if (tokens[name] != r.tokens) throw Error(ErrorKind::manifest_mismatch, "component '" + name + "' recount differs");
  }
  return summary;
}

struct PackSummary {
  std::uint64_t windows = 0;
  std::uint64_t window_tokens = 0;
  std::uint64_t document_tokens = 0;
  std::uint64_t separators = 0;
  std::uint64_t documents = 0;
  std::vector<ShardInfo> shards;
};

inline PackSummary run_pack(const fs::path& in_dir, std::uint64_t context_length, const Tokenizer& tok,
                            const fs::path& out_dir, const StageContext& ctx,
                            std::uint64_t shard_size = kDefaultWindowShardSize) {
  nlohmann::json in_manifest;
  const auto files = manifest_shards(in_dir, &in_manifest);
  verify_shard_checksums(in_dir, in_manifest);
  if (in_manifest.contains("tokenizer") && in_manifest.at("tokenizer").get<std::string>() != tok.describe()) {
    throw Error(ErrorKind::config_invalid, "pack tokenizer differs from the one used for mixing");
  }

  clear_shards(out_dir, "windows");
  PackSummary summary;
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_source;
  ShardWriter writer(out_dir, "windows", shard_size);
  Packer packer(
      context_length,
      [&](PackedWindow&& w) {
        summary.window_tokens += w.tokens;
        writer.add(serialize(w));
      },
      &tok);
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) {
      const Document d = parse_document(line);
      per_source[d.source].first += d.token_count;
      per_source[d.source].second += 1;
      summary.document_tokens += d.token_count;
      ++summary.documents;
      packer.add(d);
    });
  }
  packer.finish();
  summary.windows = packer.windows();
  summary.separators = packer.separators();
  summary.shards = std::move(writer).finish();

  ojson j;
  j["kind"] = "packed";
  j["config_hash"] = ctx.config_hash;
  j["tokenizer"] = tok.describe();
  j["context_length"] = context_length;
  j["window_count"] = summary.windows;
  j["window_tokens"] = summary.window_tokens;
  j["document_tokens"] = summary.document_tokens;
  j["separator_tokens"] = summary.separators;
  j["truncated_tokens"] = 0;
  j["carried_tokens"] = packer.carried_tokens();
  j["documents"] = summary.documents;
  ojson comps = ojson::object(), ratio = ojson::object();
  for (const auto& [name, td] : per_source) {
    comps[name] = {{"tokens", td.first}, {"documents", td.second}};
    ratio[name] = summary.document_tokens ? static_cast<double>(td.first) / static_cast<double>(summary.document_tokens) : 0.0;
  }
  j["components"] = comps;
  j["achieved_ratio"] = ratio;
  j["input_content_checksum"] = in_manifest.value("content_checksum", "");
  j["shards"] = to_json(summary.shards);
  j["content_checksum"] = content_checksum(summary.shards);
  io::write_file(out_dir / "manifest.json", j.dump(2) + "\n");

  nlohmann::json manifest;
  const auto out_files = manifest_shards(out_dir, &manifest);
  verify_shard_checksums(out_dir, manifest);
  std::uint64_t recount_tokens = 0, recount_windows = 0;
  for (const auto& f : out_files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) {
      const auto w = parse_window(line);
      recount_tokens += w.tokens;
      ++recount_windows;
    });
  }
  if (recount_tokens != summary.window_tokens || recount_windows != summary.windows) {
    throw Error(ErrorKind::manifest_mismatch, "window recount differs from manifest");
  }
  return summary;
}

}  // namespace dacp
