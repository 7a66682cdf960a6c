#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/eval/external.hpp"
#include "dacp/eval/judge.hpp"
#include "dacp/eval/prompts.hpp"
#include "dacp/eval/rouge.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"
#include "dacp/transcript.hpp"

namespace dacp::eval {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

/// One line of an evaluation file. `baseline` is the second response for
/// pairwise judging; `reference` is needed only for ROUGE.
struct EvalRecord {
  std::string example_id;
  Task task = Task::action_items;
  SlotValues slots;
  std::string transcript;
  std::string candidate;
  std::optional<std::string> reference;
  std::optional<std::string> baseline;
};

inline EvalRecord parse_eval_record(std::string_view line) {
  const auto j = dacp::detail::parse_object(line, "eval record");
  EvalRecord r;
  try {
    r.example_id = j.at("example_id").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("slots")) r.slots = j.at("slots").get<SlotValues>();
    r.transcript = j.at("transcript").get<std::string>();
    r.candidate = j.at("candidate").get<std::string>();
    if (j.contains("reference") && !j.at("reference").is_null()) r.reference = j.at("reference").get<std::string>();
    if (j.contains("baseline") && !j.at("baseline").is_null()) r.baseline = j.at("baseline").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema_violation, std::string("eval record: ") + e.what());
  }
  return r;
}

inline std::vector<EvalRecord> load_eval_records(const std::string& glob) {
  const auto files = io::expand_glob(glob);
  if (files.empty()) throw Error(ErrorKind::io_error, "no eval files match '" + glob + "'");
  std::vector<EvalRecord> records;
  for (const auto& f : files) {
    io::for_each_line(f, [&](std::string_view line, std::size_t) { records.push_back(parse_eval_record(line)); });
  }
  return records;
}

namespace detail {

struct PrfMean {
  double p = 0, r = 0, f = 0;
  void add(const Prf& s) {
    p += s.precision;
    r += s.recall;
    f += s.f1;
  }
  ojson mean(std::size_t n) const {
    const double d = n ? static_cast<double>(n) : 1.0;
    return {{"precision", p / d}, {"recall", r / d}, {"f1", f / d}};
  }
};

}  // namespace detail

/// Per-task ROUGE means over records that carry a reference. An optional
/// external scorer adds a per-task mean of its score.
inline ojson rouge_report(const std::vector<EvalRecord>& records, ExternalScorer* scorer = nullptr) {
  struct Acc {
    std::size_t n = 0;
    detail::PrfMean r1, r2, rl;
    double external = 0.0;
  };
  std::map<std::string, Acc> per_task;
  Acc overall;
  std::size_t skipped = 0;
  for (const auto& rec : records) {
    if (!rec.reference) {
      ++skipped;
      continue;
    }
    const auto s = rouge(rec.candidate, *rec.reference);
    const double ext = scorer ? scorer->score(rec.candidate, *rec.reference) : 0.0;
    for (Acc* acc : {&per_task[std::string(to_string(rec.task))], &overall}) {
      ++acc->n;
      acc->r1.add(s.r1);
      acc->r2.add(s.r2);
      acc->rl.add(s.rl);
      acc->external += ext;
    }
  }
  auto emit = [&](const Acc& a) {
    ojson j;
    j["count"] = a.n;
    j["rouge1"] = a.r1.mean(a.n);
    j["rouge2"] = a.r2.mean(a.n);
    j["rougeL"] = a.rl.mean(a.n);
    if (scorer) j["external_score"] = a.n ? a.external / static_cast<double>(a.n) : 0.0;
    return j;
  };
  ojson report;
  ojson tasks = ojson::object();
  for (const auto& [task, acc] : per_task) tasks[task] = emit(acc);
  report["tasks"] = tasks;
  report["overall"] = emit(overall);
  report["skipped_without_reference"] = skipped;
  return report;
}

/// Builds judge pairs: the instruction (slots bound) is the task
/// description, `candidate` is model A and `baseline` model B. When
/// `swap_seed` is set, a seeded half of the pairs is shown swapped.
inline std::vector<JudgePair> make_judge_pairs(const std::vector<EvalRecord>& records,
                                               const std::map<Task, PromptTemplate>& templates,
                                               std::optional<std::uint64_t> swap_seed) {
  std::vector<JudgePair> pairs;
  for (const auto& rec : records) {
    if (!rec.baseline) throw Error(ErrorKind::schema_violation, "eval record '" + rec.example_id + "' lacks 'baseline'");
    JudgePair p;
    p.example_id = rec.example_id;
    p.task_description = render_instruction(templates.at(rec.task), rec.slots);
    p.transcript = rec.transcript;
    p.response_a = rec.candidate;
    p.response_b = *rec.baseline;
    p.position_swapped = swap_seed && should_swap(*swap_seed, rec.example_id);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline ojson judge_report(const std::vector<JudgePair>& judged, const std::vector<EvalRecord>& records) {
  ojson report;
  const WinRates w = win_rates(judged);
  report["judged"] = w.judged;
  report["excluded"] = {{"service_error", w.service_errors}, {"parse_error", w.parse_errors}};
  report["counts"] = {{"A", w.wins_a}, {"B", w.wins_b}, {"tie", w.ties}};
  report["win_rates"] = {{"A", w.win_a_pct}, {"B", w.win_b_pct}, {"tie", w.tie_pct}};
  report["summary"] = format_win_rates(w);

  std::map<std::string, std::vector<JudgePair>> by_task;
  for (std::size_t i = 0; i < judged.size(); ++i) by_task[std::string(to_string(records[i].task))].push_back(judged[i]);
  ojson tasks = ojson::object();
  for (const auto& [task, pairs] : by_task) {
    try {
      tasks[task] = format_win_rates(win_rates(pairs));
    } catch (const Error&) {
      tasks[task] = nullptr;
    }
  }
  report["per_task"] = tasks;

  ojson rows = ojson::array();
  for (const auto& p : judged) {
    ojson row;
    row["example_id"] = p.example_id;
    row["position_swapped"] = p.position_swapped;
    switch (p.status) {
      case JudgeStatus::judged: {
        row["status"] = "judged";
        row["ratings"] = {{"A", (*p.ratings)[0]}, {"B", (*p.ratings)[1]}};
        row["verdict"] = to_string(*p.verdict);
        break;
      }
      case JudgeStatus::service_error: row["status"] = "service-error"; row["error"] = p.error; break;
      case JudgeStatus::parse_error: row["status"] = "parse-error"; row["error"] = p.error; break;
      case JudgeStatus::pending: row["status"] = "pending"; break;
    }
    rows.push_back(std::move(row));
  }
  report["pairs"] = rows;
  return report;
}

}  // namespace dacp::eval
