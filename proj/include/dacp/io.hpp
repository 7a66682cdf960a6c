#pragma once

#include <fnmatch.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "dacp/error.hpp"

namespace dacp::io {

namespace fs = std::filesystem;

/// Expands an input spec into a sorted file list. Accepts a plain file, a
/// directory (every *.jsonl inside), or a pattern whose final component may
/// contain shell wildcards.
inline std::vector<fs::path> expand_glob(const std::string& spec) {
  std::vector<fs::path> out;
  const fs::path path(spec);
  std::error_code ec;
  if (fs::is_regular_file(path, ec)) return {path};
  if (fs::is_directory(path, ec)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".jsonl") out.push_back(entry.path());
    }
  } else {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    const std::string pattern = path.filename().string();
    if (fs::is_directory(dir, ec)) {
      for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        if (::fnmatch(pattern.c_str(), entry.path().filename().c_str(), 0) == 0) out.push_back(entry.path());
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Calls `fn(line, line_number)` for every line; a trailing '\r' is stripped
/// and blank lines are skipped.
inline void for_each_line(const fs::path& file,
                          const std::function<void(std::string_view, std::size_t)>& fn) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + file.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(line, number);
  }
  if (in.bad()) throw Error(ErrorKind::io_error, "read failure on " + file.string());
}

inline std::vector<std::string> read_lines(const fs::path& file) {
  std::vector<std::string> lines;
  for_each_line(file, [&](std::string_view l, std::size_t) { lines.emplace_back(l); });
  return lines;
}

inline std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cannot open " + file.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Writes to `<path>.tmp` and renames on commit(), so a crashed stage never
/// leaves a partially written file under the final name.
class AtomicWriter {
 public:
  explicit AtomicWriter(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorKind::io_error, "cannot write " + tmp_.string());
  }
  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;
  ~AtomicWriter() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }

  void write(std::string_view bytes) { out_.write(bytes.data(), static_cast<std::streamsize>(bytes.size())); }
  void write_line(std::string_view line) {
    write(line);
    out_.put('\n');
  }

  void commit() {
    out_.close();
    if (!out_) throw Error(ErrorKind::io_error, "write failure on " + tmp_.string());
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw Error(ErrorKind::io_error, "cannot rename " + tmp_.string() + ": " + ec.message());
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

inline void write_file(const fs::path& path, std::string_view contents) {
  AtomicWriter w(path);
  w.write(contents);
  w.commit();
}

}  // namespace dacp::io
