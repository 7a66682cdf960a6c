#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dacp/error.hpp"
#include "dacp/hash.hpp"
#include "dacp/io.hpp"

namespace dacp {

struct ShardInfo {
  std::string file;  // name relative to the shard directory
  std::uint64_t records = 0;
  std::string checksum;
};

/// Streams records into fixed-count shards named <prefix>-00000.jsonl,
/// <prefix>-00001.jsonl, ... Files are committed atomically as they fill.
class ShardWriter {
 public:
  ShardWriter(std::filesystem::path dir, std::string prefix, std::uint64_t shard_size)
      : dir_(std::move(dir)), prefix_(std::move(prefix)), shard_size_(shard_size) {
    if (shard_size_ == 0) throw Error(ErrorKind::config_invalid, "shard_size must be positive");
    std::filesystem::create_directories(dir_);
  }

  void add(std::string_view line) {
    if (!current_) open_next();
    current_->write_line(line);
    sum_.update(line);
    sum_.update("\n");
    if (++count_ == shard_size_) close_current();
  }

  std::vector<ShardInfo> finish() && {
    if (current_) close_current();
    return std::move(shards_);
  }

 private:
  void open_next() {
    char name[64];
    std::snprintf(name, sizeof name, "-%05zu.jsonl", shards_.size());
    name_ = prefix_ + name;
    current_.emplace(dir_ / name_);
    sum_ = Checksum{};
    count_ = 0;
  }

  void close_current() {
    current_->commit();
    current_.reset();
    shards_.push_back({name_, count_, sum_.hex()});
  }

  std::filesystem::path dir_;
  std::string prefix_;
  std::uint64_t shard_size_;
  std::optional<io::AtomicWriter> current_;
  std::string name_;
  Checksum sum_;
  std::uint64_t count_ = 0;
  std::vector<ShardInfo> shards_;
};

/// Writes `records` (anything with an ADL `serialize`) into shards.
template <typename Record>
std::vector<ShardInfo> write_shards(const std::vector<Record>& records, std::uint64_t shard_size,
                                    const std::filesystem::path& dir, const std::string& prefix) {
  ShardWriter writer(dir, prefix, shard_size);
  for (const auto& r : records) writer.add(serialize(r));
  return std::move(writer).finish();
}

/// Checksum over the ordered list of shard checksums.
inline std::string content_checksum(const std::vector<ShardInfo>& shards) {
  Checksum sum;
  for (const auto& s : shards) {
    sum.update(s.file);
    sum.update(":");
    sum.update(s.checksum);
    sum.update("\n");
  }
  return sum.hex();
}

inline nlohmann::ordered_json to_json(const std::vector<ShardInfo>& shards) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& s : shards) arr.push_back({{"file", s.file}, {"records", s.records}, {"checksum", s.checksum}});
  return arr;
}

/// Recomputes the checksum of one shard file from its bytes.
inline std::string file_checksum(const std::filesystem::path& path) {
  Checksum sum;
  sum.update(io::read_file(path));
  return sum.hex();
}

}  // namespace dacp
