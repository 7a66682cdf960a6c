#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/config.hpp"
#include "dacp/stages.hpp"

namespace dacp {

inline constexpr std::array<std::string_view, 7> kStages{"filter", "score", "select", "anonymize", "augment", "mix", "pack"};

inline fs::path stage_dir(const PipelineConfig& cfg, std::string_view stage) {
  for (std::size_t i = 0; i < kStages.size(); ++i) {
    if (kStages[i] == stage) {
      char prefix[8];
      std::snprintf(prefix, sizeof prefix, "%02zu-", i + 1);
      return cfg.work_dir / (prefix + std::string(stage));
    }
  }
  throw Error(ErrorKind::config_invalid, "unknown stage '" + std::string(stage) + "'");
}

/// A stage directory is complete when its marker exists with this config's
/// hash. The marker is written last, then the directory is renamed into
/// place, so an interrupted stage is never mistaken for a finished one.
inline bool stage_complete(const PipelineConfig& cfg, std::string_view stage) {
  const fs::path marker = stage_dir(cfg, stage) / "_stage.json";
  std::error_code ec;
  if (!fs::is_regular_file(marker, ec)) return false;
  try {
    const auto j = nlohmann::json::parse(io::read_file(marker));
    return j.value("config_hash", "") == cfg.config_hash && j.value("stage", "") == stage;
  } catch (const nlohmann::json::exception&) {
    return false;
  }
}

struct StageOutcome {
  std::string stage;
  bool reused = false;
};

struct RunOptions {
  std::optional<std::string> stop_after;
  std::function<void(const std::string&)> log;
};

struct RunSummary {
  std::vector<StageOutcome> stages;
  fs::path output_dir;
};

/// filter -> score -> select -> anonymize -> augment -> mix -> pack.
/// Stages whose output is already complete for this config are reused.
inline RunSummary run_pipeline(const PipelineConfig& cfg, const RunOptions& opts = {}) {
  RunSummary summary;
  fs::create_directories(cfg.work_dir);
  const Tokenizer tok = cfg.tokenizer();
  auto log = [&](const std::string& msg) {
    if (opts.log) opts.log(msg);
  };
  auto dir = [&](std::string_view s) { return stage_dir(cfg, s); };

  auto run_stage = [&](std::string_view stage, const std::function<void(const fs::path&)>& body) {
    if (stage_complete(cfg, stage)) {
      log("stage " + std::string(stage) + ": reusing " + dir(stage).string());
      summary.stages.push_back({std::string(stage), true});
      return;
    }
    const fs::path final_dir = dir(stage);
    const fs::path tmp = final_dir.string() + ".tmp";
    fs::remove_all(tmp);
    fs::remove_all(final_dir);
    fs::create_directories(tmp);
    log("stage " + std::string(stage) + ": running");
    try {
      body(tmp);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io_error || e.kind() == ErrorKind::config_invalid) throw;
      throw Error(ErrorKind::stage_failure, std::string(stage) + ": " + e.what());
    } catch (const fs::filesystem_error& e) {
      throw Error(ErrorKind::io_error, std::string(stage) + ": " + e.what());
    }
    nlohmann::ordered_json marker;
    marker["stage"] = stage;
    marker["config_hash"] = cfg.config_hash;
    io::write_file(tmp / "_stage.json", marker.dump(2) + "\n");
    fs::rename(tmp, final_dir);
    summary.stages.push_back({std::string(stage), false});
  };
  auto stop_here = [&](std::string_view stage) { return opts.stop_after && *opts.stop_after == stage; };

  run_stage("filter", [&](const fs::path& out) {
    run_filter(cfg.input, cfg.filter, out / "transcripts.jsonl", out / "report.json", cfg.context("filter"));
  });
  if (stop_here("filter")) return summary;

  run_stage("score", [&](const fs::path& out) {
    run_score((dir("filter") / "transcripts.jsonl").string(), tok, out / "scores.jsonl", cfg.context("score"));
  });
  if (stop_here("score")) return summary;

  run_stage("select", [&](const fs::path& out) {
    run_select((dir("score") / "scores.jsonl").string(), cfg.select_n, out / "ids.txt", cfg.context("select"));
  });
  if (stop_here("select")) return summary;

  run_stage("anonymize", [&](const fs::path& out) {
    const StageContext ctx = cfg.context("anonymize");
    AnonymizationPolicy policy = cfg.policy;
    policy.seed = ctx.seed;
    run_anonymize((dir("filter") / "transcripts.jsonl").string(), policy, out / "transcripts.jsonl", out / "audit.json",
                  dir("select") / "ids.txt", ctx);
  });
  if (stop_here("anonymize")) return summary;

  run_stage("augment", [&](const fs::path& out) {
    const StageContext ctx = cfg.context("augment");
    AugmentPlan plan = cfg.plan;
    plan.seed = ctx.seed;
    run_augment((dir("anonymize") / "transcripts.jsonl").string(), plan, tok, out / "documents.jsonl", ctx);
  });
  if (stop_here("augment")) return summary;

  run_stage("mix", [&](const fs::path& out) {
    MixtureSpec spec = cfg.mix;
    for (auto& c : spec.components) {
      if (c.name == cfg.in_domain_component) c.source = (dir("augment") / "documents.jsonl").string();
    }
    run_mix(spec, tok, out, cfg.context("mix"), cfg.document_shard_size);
  });
  if (stop_here("mix")) return summary;

  run_stage("pack", [&](const fs::path& out) {
    run_pack(dir("mix"), cfg.context_length, tok, out, cfg.context("pack"), cfg.window_shard_size);
  });
  summary.output_dir = dir("pack");

  nlohmann::ordered_json j;
  j["config_hash"] = cfg.config_hash;
  auto stages = nlohmann::ordered_json::array();
  for (const auto& s : summary.stages) stages.push_back({{"stage", s.stage}, {"reused", s.reused}});
  j["stages"] = stages;
  j["output"] = summary.output_dir.string();
  io::write_file(cfg.work_dir / "run-summary.json", j.dump(2) + "\n");
  return summary;
}

}  // namespace dacp
