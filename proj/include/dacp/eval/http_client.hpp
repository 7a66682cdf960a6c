#pragma once

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/eval/external.hpp"
#include "dacp/eval/judge.hpp"

namespace dacp::eval {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

inline Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw Error(ErrorKind::config_invalid, "endpoint '" + url + "' lacks a scheme");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};
};

namespace detail {

/// POSTs a JSON body, retrying transport failures, 429 and 5xx with
/// exponential backoff. Returns the parsed response body.
inline nlohmann::json post_json(const Endpoint& ep, const std::string& api_key, const nlohmann::json& body,
                                const RetryPolicy& retry, std::chrono::seconds timeout) {
  httplib::Client client(ep.base);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  const std::string payload = body.dump();

  std::string last_error;
  auto backoff = retry.initial_backoff;
  for (int attempt = 0; attempt < std::max(1, retry.attempts); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(ep.path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw Error(ErrorKind::service_error, "HTTP " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw Error(ErrorKind::service_error, "response body is not JSON");
    }
  }
  throw Error(ErrorKind::service_error, last_error);
}

}  // namespace detail

/// Wire contract: POST {"model": str, "prompt": str}; the response body is a
/// JSON object whose "text" field holds the judge's answer.
class HttpJudgeClient : public JudgeClient {
 public:
  HttpJudgeClient(const std::string& url, std::string model, std::string api_key = {}, RetryPolicy retry = {},
                  std::chrono::seconds timeout = std::chrono::seconds(120))
      : endpoint_(split_url(url)), model_(std::move(model)), api_key_(std::move(api_key)), retry_(retry), timeout_(timeout) {}

  /// Reads the URL from $<name>, the credential from $<name>_API_KEY and
  /// the model from $<name>_MODEL (default "judge").
  static HttpJudgeClient from_env(const std::string& name, RetryPolicy retry = {}) {
    const char* url = std::getenv(name.c_str());
    if (!url || !*url) throw Error(ErrorKind::config_invalid, "environment variable " + name + " is not set");
    const char* key = std::getenv((name + "_API_KEY").c_str());
    const char* model = std::getenv((name + "_MODEL").c_str());
    return HttpJudgeClient(url, model && *model ? model : "judge", key ? key : "", retry);
  }

  std::string complete(const std::string& prompt) override {
    const auto body = detail::post_json(endpoint_, api_key_, {{"model", model_}, {"prompt", prompt}}, retry_, timeout_);
    if (!body.is_object() || !body.contains("text") || !body.at("text").is_string()) {
      throw Error(ErrorKind::service_error, "response lacks a string 'text' field");
    }
    return body.at("text").get<std::string>();
  }

 private:
  Endpoint endpoint_;
  std::string model_;
  std::string api_key_;
  RetryPolicy retry_;
  std::chrono::seconds timeout_;
};

/// POSTs {"candidate", "reference"} and expects {"score": number}.
class HttpExternalScorer : public ExternalScorer {
 public:
  explicit HttpExternalScorer(const std::string& url, std::string api_key = {}, RetryPolicy retry = {})
      : endpoint_(split_url(url)), api_key_(std::move(api_key)), retry_(retry) {}

  double score(const std::string& candidate, const std::string& reference) override {
    const auto body = detail::post_json(endpoint_, api_key_, {{"candidate", candidate}, {"reference", reference}},
                                        retry_, std::chrono::seconds(120));
    if (!body.is_object() || !body.contains("score") || !body.at("score").is_number()) {
      throw Error(ErrorKind::service_error, "scorer response lacks a numeric 'score'");
    }
    return body.at("score").get<double>();
  }

 private:
  Endpoint endpoint_;
  std::string api_key_;
  RetryPolicy retry_;
};

}  // namespace dacp::eval
