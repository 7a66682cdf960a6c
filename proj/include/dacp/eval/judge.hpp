#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/parallel.hpp"

namespace dacp::eval {

inline constexpr std::size_t kCriteria = 4;
using CriteriaRatings = std::array<int, kCriteria>;

enum class Verdict { a, b, tie };

constexpr std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::a: return "A";
    case Verdict::b: return "B";
    case Verdict::tie: return "tie";
  }
  return "tie";
}

enum class JudgeStatus { pending, judged, service_error, parse_error };

/// One qualitative comparison. `response_a` / `response_b` always refer to
/// the underlying models; `position_swapped` only changes what the judge
/// sees. Ratings and verdict are stored un-swapped.
struct JudgePair {
  std::string example_id;
  std::string task_description;
  std::string transcript;
  std::string response_a;
  std::string response_b;
  bool position_swapped = false;

  JudgeStatus status = JudgeStatus::pending;
  std::optional<std::array<CriteriaRatings, 2>> ratings;
  std::optional<Verdict> verdict;
  std::string error;
};

/// Anything that turns a prompt into the judge's text answer. Throws
/// Error(service_error) on transport failure.
class JudgeClient {
 public:
  virtual ~JudgeClient() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Judge prompt with the task, transcript and both responses inserted in
/// place of the four bracketed placeholders.
inline std::string build_judge_prompt(std::string_view task_description, std::string_view transcript,
                                      std::string_view response_a, std::string_view response_b) {
  std::string p =
      "You are provided with a task description, a transcript, and two responses generated by AI models "
      "(Model A and Model B).\n\n"
      "Your goal is to evaluate the quality of each response based on the provided context.\n\n"
      "Please rate each model on a Likert scale from 1 to 5 based on the criteria given below.\n\n"
      "*Evaluation Criteria*\n\n"
      "1: Factual Correctness: How accurately does the response reflect the information present in the "
      "transcript? Does it contain any information that is incorrect or not mentioned in the source?\n\n"
      "2: Instruction Following: How well does the response adhere to all instructions and constraints "
      "outlined in the task description?\n\n"
      "3: Clarity and Conciseness: Is the response easy to read, succinct, and to the point, avoiding "
      "unnecessary jargon, repetition, or filler words?\n\n"
      "4: Structure and Formatting: Is the response use formatting appropriately for the task based on the "
      "requirement?\n\n"
      "*Rating Scale*\n\n"
      "1: The response is extremely poor.\n\n"
      "2: The response is poor.\n\n"
      "3: The response is average.\n\n"
      "4: The response is good.\n\n"
      "5: The response is excellent.\n\n"
      "Please provide your complete evaluation in an Array of JSON objects format that contains the following "
      "keys: (i) ratings, and (ii) rationale. Here, ratings will contain an integer value between 1-5 "
      "(inclusive), while rationale will contain a brief justification for the rating.\n\n"
      "The task description, transcript, and the responses generated by the AI models are given below.\n\n";
  p += "Task Description: ";
  p += task_description;
  p += "\n\nTranscript: ";
  p += transcript;
  p += "\n\nModel A Response: ";
  p += response_a;
  p += "\n\nModel B Response: ";
  p += response_b;
  p += "\n";
  return p;
}

/// Accepts exactly eight rating objects in order: criteria 1-4 for the
/// model shown as A, then criteria 1-4 for the model shown as B. The array
/// may be wrapped in prose or a code fence. Throws parse-error otherwise.
inline std::array<CriteriaRatings, 2> parse_judge_ratings(std::string_view answer) {
  const auto open = answer.find('[');
  const auto close = answer.rfind(']');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(ErrorKind::parse_error, "judge answer has no JSON array");
  }
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(answer.substr(open, close - open + 1));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse_error, std::string("judge answer is not valid JSON: ") + e.what());
  }
  if (!arr.is_array() || arr.size() != 2 * kCriteria) {
    throw Error(ErrorKind::parse_error, "expected 8 rating objects, got " + std::to_string(arr.is_array() ? arr.size() : 0));
  }
  std::array<CriteriaRatings, 2> out{};
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& obj = arr[i];
    if (!obj.is_object() || !obj.contains("ratings") || !obj.at("ratings").is_number_integer()) {
      throw Error(ErrorKind::parse_error, "rating object " + std::to_string(i) + " lacks an integer 'ratings'");
    }
    const auto value = obj.at("ratings").get<std::int64_t>();
    if (value < 1 || value > 5) throw Error(ErrorKind::parse_error, "rating " + std::to_string(value) + " outside 1-5");
    out[i / kCriteria][i % kCriteria] = static_cast<int>(value);
  }
  return out;
}

inline double mean_rating(const CriteriaRatings& r) {
  int sum = 0;
  for (int v : r) sum += v;
  return static_cast<double>(sum) / static_cast<double>(kCriteria);
}

/// Higher mean over the four criteria wins; equal means tie. Sums are
/// compared as integers so no rounding can split a tie.
inline Verdict verdict_from_ratings(const std::array<CriteriaRatings, 2>& ratings) {
  int a = 0, b = 0;
  for (int v : ratings[0]) a += v;
  for (int v : ratings[1]) b += v;
  return a > b ? Verdict::a : (b > a ? Verdict::b : Verdict::tie);
}

/// Seeded coin for position-swap debiasing.
inline bool should_swap(std::uint64_t seed, std::string_view example_id) {
  return (keyed_hash(seed, {"position-swap", example_id}) & 1U) != 0;
}

/// Judges one pair. Service and parse failures are recorded on the pair
/// (status + error) rather than thrown, so a batch keeps going.
inline JudgePair judge_pair(JudgePair pair, JudgeClient& client) {
  const std::string& shown_a = pair.position_swapped ? pair.response_b : pair.response_a;
  const std::string& shown_b = pair.position_swapped ? pair.response_a : pair.response_b;
  const std::string prompt = build_judge_prompt(pair.task_description, pair.transcript, shown_a, shown_b);
  std::string answer;
  try {
    answer = client.complete(prompt);
  } catch (const Error& e) {
    pair.status = JudgeStatus::service_error;
    pair.error = e.what();
    return pair;
  } catch (const std::exception& e) {
    pair.status = JudgeStatus::service_error;
    pair.error = e.what();
    return pair;
  }
  try {
    auto ratings = parse_judge_ratings(answer);
    if (pair.position_swapped) std::swap(ratings[0], ratings[1]);
    pair.ratings = ratings;
    pair.verdict = verdict_from_ratings(ratings);
    pair.status = JudgeStatus::judged;
  } catch (const Error& e) {
    pair.status = JudgeStatus::parse_error;
    pair.error = e.what();
  }
  return pair;
}

/// Judges a batch with at most `max_in_flight` concurrent requests; results
/// keep input order.
inline std::vector<JudgePair> judge_all(const std::vector<JudgePair>& pairs, JudgeClient& client, std::size_t max_in_flight) {
  return parallel_map(pairs, max_in_flight, [&](const JudgePair& p) { return judge_pair(p, client); });
}

struct WinRates {
  std::size_t judged = 0;
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  std::size_t service_errors = 0;
  std::size_t parse_errors = 0;
  double win_a_pct = 0.0;
  double win_b_pct = 0.0;
  double tie_pct = 0.0;
};

/// Percentages over judged pairs; excluded pairs are counted separately.
inline WinRates win_rates(const std::vector<JudgePair>& pairs) {
  WinRates w;
  for (const auto& p : pairs) {
    switch (p.status) {
      case JudgeStatus::judged:
        ++w.judged;
        if (*p.verdict == Verdict::a) ++w.wins_a;
        else if (*p.verdict == Verdict::b) ++w.wins_b;
        else ++w.ties;
        break;
      case JudgeStatus::service_error: ++w.service_errors; break;
      case JudgeStatus::parse_error: ++w.parse_errors; break;
      case JudgeStatus::pending: break;
    }
  }
  if (w.judged == 0) throw Error(ErrorKind::no_judged_pairs, "no pair received a verdict");
  const double n = static_cast<double>(w.judged);
  w.win_a_pct = 100.0 * static_cast<double>(w.wins_a) / n;
  w.win_b_pct = 100.0 * static_cast<double>(w.wins_b) / n;
  w.tie_pct = 100.0 * static_cast<double>(w.ties) / n;
  return w;
}

inline std::string format_percent(double pct) {
  char buf[32];
  const double rounded = std::round(pct * 10.0) / 10.0;
  if (std::abs(rounded - std::round(rounded)) < 1e-9) {
    std::snprintf(buf, sizeof buf, "%.0f%%", rounded);
  } else {
    std::snprintf(buf, sizeof buf, "%.1f%%", rounded);
  }
  return buf;
}

/// "A 45%, B 29%, tie 26%"
inline std::string format_win_rates(const WinRates& w, std::string_view label_a = "A", std::string_view label_b = "B") {
  return std::string(label_a) + " " + format_percent(w.win_a_pct) + ", " + std::string(label_b) + " " +
         format_percent(w.win_b_pct) + ", tie " + format_percent(w.tie_pct);
}

}  // namespace dacp::eval
