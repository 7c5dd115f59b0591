#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace brd {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct LanguageMismatch : Error {
  explicit LanguageMismatch(const std::string& what) : Error(what) {}
};

struct UnsupportedSpec : Error {
  explicit UnsupportedSpec(const std::string& what) : Error(what) {}
};

// Raised when a finite truncation cannot supply the next level of a
// construction; carries the unmet obligation instead of truncating silently.
struct DepthExhausted : Error {
  explicit DepthExhausted(const std::string& what) : Error(what) {}
};

struct BudgetExhausted : Error {
  explicit BudgetExhausted(const std::string& what) : Error(what) {}
};

// splitmix64: tiny, seedable, stable across platforms. Streams are derived
// per-task from a root seed so parallel schedules cannot perturb results.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // uniform in [0, n)
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }
  static Rng stream(uint64_t root, uint64_t stream_id) {
    Rng r(root ^ (0xa0761d6478bd642fULL * (stream_id + 1)));
    r.next();
    return r;
  }
};

inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string to_hex(const std::vector<uint8_t>& bytes);
std::string to_hex_u64(uint64_t v);

}  // namespace brd
