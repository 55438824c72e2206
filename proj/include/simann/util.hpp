#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace simann {

// FNV-1a, used for content-addressed artifact caching.
struct Fnv1a64 {
  std::uint64_t state = 1469598103934665603ULL;
  void update(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      state ^= p[i];
      state *= 1099511628211ULL;
    }
  }
  void update(std::string_view s) { update(s.data(), s.size()); }
  std::uint64_t digest() const { return state; }
};

std::uint64_t hash_file(const std::string& path);
std::string hex64(std::uint64_t v);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Splits on '\t' without unescaping; keeps empty fields.
std::vector<std::string_view> split_tsv(std::string_view line);

// Effective worker count: `requested` (or OpenMP default when <= 0), capped
// by the SIMANN_THREADS environment variable when it is set.
int effective_threads(int requested);

}  // namespace simann
