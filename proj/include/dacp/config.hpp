#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/anonymizer.hpp"
#include "dacp/augmenter.hpp"
#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"
#include "dacp/mixture.hpp"
#include "dacp/packing.hpp"
#include "dacp/stages.hpp"
#include "dacp/tokenizer.hpp"

namespace dacp {

/// Fully validated configuration for the whole pipeline. Relative paths are
/// resolved against the config file's directory.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string input;
  fs::path work_dir;
  std::string tokenizer_spec = "word";
  FilterOptions filter;
  std::size_t select_n = 1;
  AnonymizationPolicy policy;
  AugmentPlan plan;
  MixtureSpec mix;
  std::string in_domain_component;  // the component fed by the augment stage
  std::uint64_t context_length = kDefaultContextLength;
  std::uint64_t window_shard_size = kDefaultWindowShardSize;
  std::uint64_t document_shard_size = kDefaultDocumentShardSize;
  std::string config_hash;

  Tokenizer tokenizer() const { return Tokenizer::from_spec(tokenizer_spec); }

  StageContext context(std::string_view stage) const { return {derive_seed(seed, stage), workers, config_hash}; }
};

struct ValidationResult {
  std::optional<PipelineConfig> config;
  std::vector<std::string> violations;
};

/// Hash of the canonical (key-sorted, referenced files inlined) config with
/// the worker count, log level and output location removed: none of them
/// may change any artifact.
inline std::string config_hash_of(nlohmann::json resolved) {
  if (resolved.is_object()) {
    resolved.erase("workers");
    resolved.erase("log_level");
    resolved.erase("work_dir");
  }
  return to_hex(keyed_hash(0, {"pipeline-config", resolved.dump()}));
}

/// "25,000,000,000"
inline std::string with_thousands(std::uint64_t v) {
  std::string digits = std::to_string(v), out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

/// One line per component: "<name>: <allocation> per component (weight w)".
inline std::vector<std::string> describe_mixture(const MixtureSpec& spec) {
  std::vector<std::string> lines;
  for (const auto& c : spec.components) {
    char w[32];
    std::snprintf(w, sizeof w, "%g", c.weight);
    lines.push_back(c.name + ": " + with_thousands(spec.allocation(c)) + " per component (weight " + w + ")");
  }
  return lines;
}

namespace detail {

inline fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

/// A section is either inline JSON or a string path to a JSON file.
inline std::optional<nlohmann::json> load_section(const nlohmann::json& root, const char* key, const fs::path& base,
                                                  std::vector<std::string>& problems, bool required) {
  if (!root.contains(key)) {
    if (required) problems.push_back(std::string("missing section '") + key + "'");
    return std::nullopt;
  }
  const auto& v = root.at(key);
  if (v.is_object()) return std::optional<nlohmann::json>(std::in_place, v);
  if (v.is_string()) {
    const fs::path file = resolve(base, v.get<std::string>());
    try {
      return nlohmann::json::parse(io::read_file(file));
    } catch (const std::exception& e) {
      problems.push_back(std::string(key) + ": cannot load " + file.string() + ": " + e.what());
      return std::nullopt;
    }
  }
  problems.push_back(std::string("section '") + key + "' must be an object or a file path");
  return std::nullopt;
}

inline void split_messages(const std::string& what, const std::string& prefix, std::vector<std::string>& out) {
  // Errors raised by section loaders list one violation per "  - " line.
  std::size_t pos = what.find("\n  - ");
  if (pos == std::string::npos) {
    out.push_back(prefix + what);
    return;
  }
  while (pos != std::string::npos) {
    const std::size_t next = what.find("\n  - ", pos + 5);
    out.push_back(prefix + what.substr(pos + 5, next == std::string::npos ? std::string::npos : next - pos - 5));
    pos = next;
  }
}

}  // namespace detail

/// Checks every stage invariant and reports all violations, never just the
/// first. Never throws.
inline ValidationResult validate_config_json(const nlohmann::json& root, const fs::path& base_dir) {
  ValidationResult result;
  auto& problems = result.violations;
  PipelineConfig cfg;
  try {
    if (!root.is_object()) {
      problems.push_back("config must be a JSON object");
      return result;
    }
    nlohmann::json resolved = root;

    auto get_uint = [&](const nlohmann::json& obj, const char* key, std::uint64_t fallback, const std::string& ctx,
                        std::uint64_t min_value) -> std::uint64_t {
      if (!obj.contains(key)) return fallback;
      const auto& v = obj.at(key);
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
        problems.push_back(ctx + key + " must be a non-negative integer");
        return fallback;
      }
      const auto value = v.get<std::uint64_t>();
      if (value < min_value) {
        problems.push_back(ctx + key + " must be >= " + std::to_string(min_value));
        return fallback;
      }
      return value;
    };
    auto get_string = [&](const nlohmann::json& obj, const char* key, const std::string& ctx) -> std::optional<std::string> {
      if (!obj.contains(key)) return std::nullopt;
      if (!obj.at(key).is_string()) {
        problems.push_back(ctx + key + " must be a string");
        return std::nullopt;
      }
      return obj.at(key).get<std::string>();
    };

    cfg.seed = get_uint(root, "seed", 0, "", 0);
    cfg.workers = static_cast<std::size_t>(get_uint(root, "workers", 1, "", 1));

    if (auto input = get_string(root, "input", "")) {
      cfg.input = detail::resolve(base_dir, *input).string();
      if (io::expand_glob(cfg.input).empty()) problems.push_back("input '" + *input + "' matches no files");
    } else if (!root.contains("input")) {
      problems.push_back("missing 'input'");
    }
    if (auto work = get_string(root, "work_dir", "")) {
      cfg.work_dir = detail::resolve(base_dir, *work);
    } else if (!root.contains("work_dir")) {
      problems.push_back("missing 'work_dir'");
    }

    if (auto tok = get_string(root, "tokenizer", "")) {
      cfg.tokenizer_spec = *tok;
      const std::string vocab_prefix = tok->starts_with("vocab:") ? "vocab:" : "external-vocab:";
      if (tok->starts_with(vocab_prefix)) {
        const fs::path vocab = detail::resolve(base_dir, tok->substr(vocab_prefix.size()));
        cfg.tokenizer_spec = vocab_prefix + vocab.string();
        std::error_code ec;
        if (!fs::is_regular_file(vocab, ec)) problems.push_back("tokenizer vocabulary " + vocab.string() + " not found");
        else resolved["tokenizer"] = Tokenizer::from_vocab_file(vocab).describe();
      } else if (*tok != "word") {
        problems.push_back("unknown tokenizer mode '" + *tok + "'");
      }
    }

    if (auto filter = detail::load_section(root, "filter", base_dir, problems, true)) {
      if (!filter->is_object()) problems.push_back("filter must be an object");
      else cfg.filter = FilterOptions::from_json(*filter, problems);
      resolved["filter"] = *filter;
    }

    if (auto select = detail::load_section(root, "select", base_dir, problems, true)) {
      if (!select->contains("n")) problems.push_back("select.n is required");
      cfg.select_n = static_cast<std::size_t>(get_uint(*select, "n", 1, "select.", 1));
      resolved["select"] = *select;
    }

    if (auto anon = detail::load_section(root, "anonymize", base_dir, problems, true)) {
      try {
        cfg.policy = AnonymizationPolicy::from_json(*anon);
      } catch (const Error& e) {
        detail::split_messages(e.what(), "anonymize: ", problems);
      } catch (const nlohmann::json::exception& e) {
        problems.push_back(std::string("anonymize: ") + e.what());
      }
      resolved["anonymize"] = *anon;
    }

    if (auto aug = detail::load_section(root, "augment", base_dir, problems, true)) {
      try {
        cfg.plan = AugmentPlan::from_json(*aug);
      } catch (const Error& e) {
        detail::split_messages(e.what(), "augment: ", problems);
      } catch (const nlohmann::json::exception& e) {
        problems.push_back(std::string("augment: ") + e.what());
      }
      resolved["augment"] = *aug;
    }

    if (auto mix = detail::load_section(root, "mix", base_dir, problems, true)) {
      try {
        cfg.mix = MixtureSpec::from_json(*mix);
        for (auto& v : cfg.mix.violations()) problems.push_back("mix: " + v);
        std::size_t fed = 0;
        for (auto& c : cfg.mix.components) {
          if (c.source.empty()) {
            cfg.in_domain_component = c.name;
            ++fed;
          } else {
            c.source = detail::resolve(base_dir, c.source).string();
            if (io::expand_glob(c.source).empty()) problems.push_back("mix: component '" + c.name + "' source matches no files");
          }
        }
        if (fed != 1) problems.push_back("mix: exactly one component must omit 'source' (it receives the augment output)");
        cfg.document_shard_size = get_uint(*mix, "shard_size", kDefaultDocumentShardSize, "mix.", 1);
      } catch (const nlohmann::json::exception& e) {
        problems.push_back(std::string("mix: ") + e.what());
      }
      resolved["mix"] = *mix;
    }

    if (auto pack = detail::load_section(root, "pack", base_dir, problems, false)) {
      cfg.context_length = get_uint(*pack, "context_length", kDefaultContextLength, "pack.", 2);
      cfg.window_shard_size = get_uint(*pack, "shard_size", kDefaultWindowShardSize, "pack.", 1);
      resolved["pack"] = *pack;
    }

    cfg.config_hash = config_hash_of(resolved);
  } catch (const std::exception& e) {
    problems.push_back(std::string("config: ") + e.what());
  } catch (...) {
    problems.push_back("config: unknown failure");
  }
  if (problems.empty()) result.config = std::move(cfg);
  return result;
}

inline ValidationResult validate_config(const fs::path& path) {
  ValidationResult result;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    result.violations.push_back("config file " + path.string() + " not found");
    return result;
  }
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(io::read_file(path));
  } catch (const std::exception& e) {
    result.violations.push_back(std::string("config is not valid JSON: ") + e.what());
    return result;
  }
  return validate_config_json(root, path.parent_path());
}

/// Validates or throws config-invalid listing every violation.
inline PipelineConfig load_config(const fs::path& path) {
  auto r = validate_config(path);
  if (!r.config) {
    std::string msg = "config " + path.string() + " is invalid:";
    for (const auto& v : r.violations) msg += "\n  - " + v;
    throw Error(ErrorKind::config_invalid, msg);
  }
  return std::move(*r.config);
}

}  // namespace dacp
