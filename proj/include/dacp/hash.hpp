#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

namespace dacp {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

/// Platform-stable keyed hash. All seeded decisions in the pipeline
/// (sampling, noising, style choice, interleave) go through this so that a
/// decision depends only on (seed, key parts), never on input order,
/// scheduling or the standard library's std::hash.
///
/// Definition: h = splitmix64(seed); for each part, h = fnv1a(part, h) then
/// fold in a 0xff separator byte; result = splitmix64(h).
inline std::uint64_t keyed_hash(std::uint64_t seed, std::initializer_list<std::string_view> parts) {
  std::uint64_t h = splitmix64(seed);
  for (std::string_view part : parts) {
    h = fnv1a(part, h);
    h ^= 0xffU;
    h *= kFnvPrime;
  }
  return splitmix64(h);
}

/// Maps a hash to [0, 1) using its top 53 bits.
constexpr double unit_interval(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

/// Per-stage seed derived from the single global seed.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage) {
  return keyed_hash(global_seed, {"stage-seed", stage});
}

inline std::string to_hex(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xfU];
    value >>= 4;
  }
  return out;
}

/// Incremental content checksum (FNV-1a 64) used by shard manifests.
class Checksum {
 public:
  void update(std::string_view bytes) { state_ = fnv1a(bytes, state_); }
  std::uint64_t value() const { return state_; }
  std::string hex() const { return to_hex(state_); }

 private:
  std::uint64_t state_ = kFnvOffset;
};

}  // namespace dacp
