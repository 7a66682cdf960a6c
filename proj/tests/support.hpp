#pragma once

// Small helpers shared by the test binaries.

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dacp.hpp"
#include "dacp/synthetic.hpp"

namespace dacp::testing {

using TranscriptGen = synthetic::TranscriptShape;

inline std::string random_sentence(std::mt19937_64& rng, int min_words = 1, int max_words = 12) {
  return synthetic::sentence(rng, min_words, max_words);
}

inline std::vector<Transcript> random_corpus(std::size_t n, std::uint64_t seed, const TranscriptGen& g = {}) {
  return synthetic::corpus(n, seed, g);
}

/// Fresh scratch directory under the build tree, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("dacp-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_transcripts(const std::filesystem::path& file, const std::vector<Transcript>& ts) {
  io::AtomicWriter w(file);
  for (const auto& t : ts) w.write_line(serialize(t));
  w.commit();
}

struct DeskScale {
  std::size_t transcripts = 2000;
  std::size_t replay = 1000;
  std::size_t select_n = 1000;
  std::uint64_t context_length = 128;
  std::uint64_t budget = 100000;
  std::uint64_t seed = 20240601;
  std::size_t workers = 1;
  std::uint64_t window_shard_size = 250;
  std::uint64_t document_shard_size = 400;
};

/// Pipeline config with every section inline except the shipped policy and
/// augmentation plan, which are referenced by path.
inline nlohmann::json desk_config_json(const std::filesystem::path& data_dir, const std::filesystem::path& work_dir,
                                       const DeskScale& d) {
  const std::filesystem::path configs = std::filesystem::path(DACP_SOURCE_DIR) / "configs";
  nlohmann::json j;
  j["seed"] = d.seed;
  j["workers"] = d.workers;
  j["input"] = (data_dir / "transcripts" / "*.jsonl").string();
  j["work_dir"] = work_dir.string();
  j["tokenizer"] = "word";
  j["filter"] = {{"min_duration_s", 120},     {"min_speakers", 2},           {"allowed_languages", {"en"}},
                 {"per_org_cap", d.transcripts / 6}, {"target_pool_size", d.transcripts * 3 / 4}};
  j["select"] = {{"n", d.select_n}};
  j["anonymize"] = (configs / "policy.default.json").string();
  j["augment"] = (configs / "augment.default.json").string();
  j["mix"] = {{"total_token_budget", d.budget},
              {"shard_size", d.document_shard_size},
              {"components",
               {{{"name", "in_domain"}, {"weight", 0.5}},
                {{"name", "replay"}, {"source", (data_dir / "replay" / "*.jsonl").string()}, {"weight", 0.5}}}}};
  j["pack"] = {{"context_length", d.context_length}, {"shard_size", d.window_shard_size}};
  return j;
}

inline synthetic::TranscriptShape desk_shape() {
  synthetic::TranscriptShape g;
  g.min_turns = 4;
  g.min_duration = 130.0;
  g.pii_rate = 0.2;
  return g;
}

/// Writes demo data under `root/data` and `root/config.json`; returns the config path.
inline std::filesystem::path write_desk_workspace(const std::filesystem::path& root, const DeskScale& d = {}) {
  synthetic::write_demo_data(root / "data", d.transcripts, d.replay, d.seed, desk_shape());
  const auto cfg = root / "config.json";
  io::write_file(cfg, desk_config_json(root / "data", root / "work", d).dump(2) + "\n");
  return cfg;
}

/// Relative path -> bytes for every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[std::filesystem::relative(e.path(), dir).string()] = io::read_file(e.path());
  }
  return files;
}

}  // namespace dacp::testing
