// dacp: command-line front end for the curation pipeline and eval harness.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "dacp.hpp"
#include "dacp/eval/http_client.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfigInvalid = 2, kStageFailure = 3, kIoError = 4 };

int exit_code_for(dacp::ErrorKind kind) {
  switch (kind) {
    case dacp::ErrorKind::config_invalid:
    case dacp::ErrorKind::invalid_pattern:
    case dacp::ErrorKind::missing_slot:
    case dacp::ErrorKind::unknown_slot_value:
      return kConfigInvalid;
    case dacp::ErrorKind::io_error:
      return kIoError;
    default:
      return kStageFailure;
  }
}

nlohmann::json load_json(const std::string& path) {
  try {
    return nlohmann::json::parse(dacp::io::read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw dacp::Error(dacp::ErrorKind::config_invalid, path + ": " + e.what());
  }
}

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 0;
  std::string log_level = "info";

  std::optional<dacp::PipelineConfig> pipeline;

  const dacp::PipelineConfig* cfg() {
    if (!pipeline && !config.empty()) pipeline = dacp::load_config(config);
    return pipeline ? &*pipeline : nullptr;
  }

  /// Seed precedence: --seed, then the pipeline config, then the stage
  /// file's own seed.
  std::uint64_t stage_seed(std::string_view stage, std::uint64_t file_seed) {
    if (seed) return dacp::derive_seed(*seed, stage);
    if (cfg()) return dacp::derive_seed(cfg()->seed, stage);
    return file_seed;
  }

  dacp::StageContext context(std::string_view stage, std::uint64_t file_seed, const nlohmann::json& options) {
    dacp::StageContext ctx;
    ctx.seed = stage_seed(stage, file_seed);
    ctx.workers = workers ? workers : (cfg() ? cfg()->workers : 1);
    if (cfg() && (!seed || *seed == cfg()->seed)) {
      ctx.config_hash = cfg()->config_hash;
    } else {
      nlohmann::json h = {{"stage", stage}, {"options", options}, {"seed", ctx.seed}};
      ctx.config_hash = dacp::config_hash_of(h);
    }
    return ctx;
  }

  dacp::Tokenizer tokenizer(const std::string& flag) {
    if (!flag.empty()) return dacp::Tokenizer::from_spec(flag);
    if (cfg()) return cfg()->tokenizer();
    return dacp::Tokenizer::word();
  }
};

[[noreturn]] void need(const std::string& what) {
  throw dacp::Error(dacp::ErrorKind::config_invalid, what + " is required (flag or --config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Corpus curation and evaluation toolkit for domain-adaptive continual pre-training"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Pipeline config file");
  app.add_option("--seed", g.seed, "Global seed; per-stage seeds are derived from it");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off");

  // filter
  auto* filter = app.add_subcommand("filter", "Eligibility filtering and organization-diversity sampling");
  std::string f_rules, f_in, f_out, f_report;
  filter->add_option("--rules", f_rules, "Rules config");
  filter->add_option("--in", f_in, "Input transcripts (file, directory or glob)")->required();
  filter->add_option("--out", f_out, "Output transcripts")->required();
  filter->add_option("--report", f_report, "Report file")->required();

  // score / select
  auto* score = app.add_subcommand("score", "Token-type entropy scoring");
  std::string s_tok, s_in, s_out;
  score->add_option("--tokenizer", s_tok, "word | vocab:<path>");
  score->add_option("--in", s_in)->required();
  score->add_option("--out", s_out)->required();

  auto* select = app.add_subcommand("select", "Top-N selection by entropy");
  std::size_t sel_n = 0;
  std::string sel_scores, sel_out;
  select->add_option("--n", sel_n)->check(CLI::PositiveNumber);
  select->add_option("--scores", sel_scores)->required();
  select->add_option("--out", sel_out)->required();

  // anonymize / augment
  auto* anon = app.add_subcommand("anonymize", "PII masking and noising");
  std::string a_policy, a_in, a_out, a_audit, a_ids;
  anon->add_option("--policy", a_policy);
  anon->add_option("--in", a_in)->required();
  anon->add_option("--out", a_out)->required();
  anon->add_option("--audit", a_audit)->required();
  anon->add_option("--ids", a_ids, "Only keep transcripts whose id is listed");

  auto* aug = app.add_subcommand("augment", "Transcript format diversification");
  std::string g_plan, g_in, g_out, g_tok;
  aug->add_option("--plan", g_plan);
  aug->add_option("--in", g_in)->required();
  aug->add_option("--out", g_out)->required();
  aug->add_option("--tokenizer", g_tok);

  // mix / pack
  auto* mix = app.add_subcommand("mix", "Budgeted replay mixing");
  std::string m_spec, m_out, m_tok;
  std::uint64_t m_shard = dacp::kDefaultDocumentShardSize;
  mix->add_option("--spec", m_spec)->required();
  mix->add_option("--out", m_out)->required();
  mix->add_option("--tokenizer", m_tok);
  mix->add_option("--shard-size", m_shard)->check(CLI::PositiveNumber);

  auto* pack = app.add_subcommand("pack", "Context-window packing and sharding");
  std::uint64_t p_len = 0;
  std::string p_in, p_out, p_tok;
  std::uint64_t p_shard = dacp::kDefaultWindowShardSize;
  pack->add_option("--L", p_len, "Context length (default 8000)");
  pack->add_option("--in", p_in)->required();
  pack->add_option("--out", p_out)->required();
  pack->add_option("--tokenizer", p_tok);
  pack->add_option("--shard-size", p_shard)->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "ROUGE and LLM-judge evaluation");
  eval->require_subcommand(1);
  auto* eval_rouge = eval->add_subcommand("rouge", "Per-task ROUGE means");
  std::string er_in, er_report, er_scorer_env;
  eval_rouge->add_option("--in", er_in)->required();
  eval_rouge->add_option("--report", er_report)->required();
  eval_rouge->add_option("--scorer-env", er_scorer_env, "Env var holding an external scorer URL");
  auto* eval_judge = eval->add_subcommand("judge", "Pairwise LLM-judge win rates");
  std::string ej_in, ej_env, ej_report, ej_templates;
  bool ej_no_swap = false;
  int ej_retries = 3;
  eval_judge->add_option("--in", ej_in)->required();
  eval_judge->add_option("--endpoint-env", ej_env, "Env var holding the judge URL")->required();
  eval_judge->add_option("--report", ej_report)->required();
  eval_judge->add_option("--templates", ej_templates, "Prompt template overrides");
  eval_judge->add_flag("--no-swap", ej_no_swap, "Disable position-swap debiasing");
  eval_judge->add_option("--retries", ej_retries)->check(CLI::PositiveNumber);

  // run / validate
  auto* run = app.add_subcommand("run", "Run the full pipeline from --config");
  std::string r_stop;
  run->add_option("--stop-after", r_stop, "Stop after this stage")
      ->check(CLI::IsMember(std::vector<std::string>(dacp::kStages.begin(), dacp::kStages.end())));
  auto* validate = app.add_subcommand("validate", "Validate --config and report every violation");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(g.log_level));

  try {
    if (*filter) {
      dacp::FilterOptions opts;
      nlohmann::json raw;
      std::uint64_t file_seed = 0;
      if (!f_rules.empty()) {
        raw = load_json(f_rules);
        std::vector<std::string> problems;
        opts = dacp::FilterOptions::from_json(raw, problems);
        if (!problems.empty()) {
          std::string msg = "rules invalid:";
          for (const auto& p : problems) msg += "\n  - " + p;
          throw dacp::Error(dacp::ErrorKind::config_invalid, msg);
        }
        file_seed = raw.value<std::uint64_t>("seed", 0);
      } else if (g.cfg()) {
        opts = g.cfg()->filter;
      } else {
        need("--rules");
      }
      const auto report = dacp::run_filter(f_in, opts, f_out, f_report, g.context("filter", file_seed, raw));
      spdlog::info("filter: {} records, {} eligible, {} selected", report.input_records, report.eligible,
                   report.sample.selected_ids.size());
      if (report.sample.shortfall) spdlog::warn("pool-underflow: {} short of target", report.sample.shortfall);
    } else if (*score) {
      const auto tok = g.tokenizer(s_tok);
      const auto s = dacp::run_score(s_in, tok, s_out, g.context("score", 0, {{"tokenizer", tok.describe()}}));
      spdlog::info("score: {} scored, {} empty documents excluded", s.scored, s.empty_documents);
    } else if (*select) {
      std::size_t n = sel_n;
      if (n == 0 && g.cfg()) n = g.cfg()->select_n;
      if (n == 0) need("--n");
      const auto chosen = dacp::run_select(sel_scores, n, sel_out, g.context("select", 0, {{"n", n}}));
      spdlog::info("select: kept {}", chosen.size());
    } else if (*anon) {
      dacp::AnonymizationPolicy policy;
      nlohmann::json raw;
      if (!a_policy.empty()) {
        raw = load_json(a_policy);
        policy = dacp::AnonymizationPolicy::from_json(raw);
      } else if (g.cfg()) {
        policy = g.cfg()->policy;
      } else {
        need("--policy");
      }
      const auto ctx = g.context("anonymize", policy.seed, raw);
      policy.seed = ctx.seed;
      std::optional<fs::path> ids;
      if (!a_ids.empty()) ids = a_ids;
      const auto audit = dacp::run_anonymize(a_in, policy, a_out, a_audit, ids, ctx);
      std::uint64_t total = 0;
      for (const auto& [_, n] : audit) total += n;
      spdlog::info("anonymize: {} replacements", total);
    } else if (*aug) {
      dacp::AugmentPlan plan;
      nlohmann::json raw;
      if (!g_plan.empty()) {
        raw = load_json(g_plan);
        plan = dacp::AugmentPlan::from_json(raw);
      } else if (g.cfg()) {
        plan = g.cfg()->plan;
      } else {
        need("--plan");
      }
      const auto tok = g.tokenizer(g_tok);
      raw["tokenizer"] = tok.describe();
      const auto ctx = g.context("augment", plan.seed, raw);
      plan.seed = ctx.seed;
      spdlog::info("augment: {} documents", dacp::run_augment(g_in, plan, tok, g_out, ctx));
    } else if (*mix) {
      const auto raw = load_json(m_spec);
      auto spec = dacp::MixtureSpec::from_json(raw);
      const fs::path base = fs::path(m_spec).parent_path();
      for (auto& c : spec.components) {
        if (!c.source.empty() && fs::path(c.source).is_relative()) c.source = (base / c.source).string();
      }
      for (const auto& line : dacp::describe_mixture(spec)) spdlog::info("mix: {}", line);
      const auto tok = g.tokenizer(m_tok);
      nlohmann::json hashed = raw;
      hashed["tokenizer"] = tok.describe();
      if (!mix->count("--shard-size") && g.cfg()) m_shard = g.cfg()->document_shard_size;
      const auto s = dacp::run_mix(spec, tok, m_out, g.context("mix", spec.seed, hashed), m_shard);
      for (const auto& [name, r] : s.mixture.components) {
        spdlog::info("mix: {} {} tokens in {} documents{}", name, r.tokens, r.documents, r.underflow ? " (underflow)" : "");
      }
    } else if (*pack) {
      std::uint64_t len = p_len;
      if (len == 0) len = g.cfg() ? g.cfg()->context_length : dacp::kDefaultContextLength;
      const auto tok = g.tokenizer(p_tok);
      const auto ctx = g.context("pack", 0, {{"context_length", len}, {"tokenizer", tok.describe()}});
      if (!pack->count("--shard-size") && g.cfg()) p_shard = g.cfg()->window_shard_size;
      const auto s = dacp::run_pack(p_in, len, tok, p_out, ctx, p_shard);
      spdlog::info("pack: {} windows at L={} ({} tokens, {} separators)", s.windows, len, s.window_tokens, s.separators);
    } else if (*eval) {
      if (*eval_rouge) {
        const auto records = dacp::eval::load_eval_records(er_in);
        std::optional<dacp::eval::HttpExternalScorer> scorer;
        if (!er_scorer_env.empty()) {
          const char* url = std::getenv(er_scorer_env.c_str());
          if (!url || !*url) throw dacp::Error(dacp::ErrorKind::config_invalid, er_scorer_env + " is not set");
          const char* key = std::getenv((er_scorer_env + "_API_KEY").c_str());
          scorer.emplace(url, key ? key : "");
        }
        const auto report = dacp::eval::rouge_report(records, scorer ? &*scorer : nullptr);
        dacp::io::write_file(er_report, report.dump(2) + "\n");
        spdlog::info("eval rouge: {} scored", report["overall"]["count"].get<std::size_t>());
      } else {
        const auto records = dacp::eval::load_eval_records(ej_in);
        const auto templates =
            dacp::eval::PromptTemplate::load_set(ej_templates.empty() ? nlohmann::json::object() : load_json(ej_templates));
        std::optional<std::uint64_t> swap_seed;
        if (!ej_no_swap) swap_seed = g.stage_seed("eval", 0);
        auto pairs = dacp::eval::make_judge_pairs(records, templates, swap_seed);
        auto client = dacp::eval::HttpJudgeClient::from_env(ej_env, {ej_retries, std::chrono::milliseconds(500)});
        const std::size_t in_flight = g.workers ? g.workers : 4;
        const auto judged = dacp::eval::judge_all(pairs, client, in_flight);
        const auto report = dacp::eval::judge_report(judged, records);
        dacp::io::write_file(ej_report, report.dump(2) + "\n");
        std::cout << report["summary"].get<std::string>() << "\n";
      }
    } else if (*run) {
      if (g.config.empty()) need("--config");
      auto cfg = dacp::load_config(g.config);
      if (g.seed && *g.seed != cfg.seed) {
        cfg.seed = *g.seed;
        cfg.config_hash = dacp::config_hash_of({{"base", cfg.config_hash}, {"seed", cfg.seed}});
      }
      if (g.workers) cfg.workers = g.workers;
      dacp::RunOptions opts;
      if (!r_stop.empty()) opts.stop_after = r_stop;
      opts.log = [](const std::string& m) { spdlog::info("{}", m); };
      const auto summary = dacp::run_pipeline(cfg, opts);
      spdlog::info("run: done, {} stages", summary.stages.size());
    } else if (*validate) {
      if (g.config.empty()) need("--config");
      const auto result = dacp::validate_config(g.config);
      if (!result.config) {
        for (const auto& v : result.violations) std::cerr << "violation: " << v << "\n";
        return kConfigInvalid;
      }
      std::cout << "config OK (hash " << result.config->config_hash << ")\n";
      for (const auto& line : dacp::describe_mixture(result.config->mix)) std::cout << "  " << line << "\n";
    }
  } catch (const dacp::Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    spdlog::error("io-error: {}", e.what());
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("config-invalid: {}", e.what());
    return kConfigInvalid;
  }
  return kOk;
}
