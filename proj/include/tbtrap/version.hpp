#pragma once

#include <cstdint>
#include <string>

namespace tbtrap {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit, used to stamp reports with a hash of their input config.
inline std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string fnv1a64_hex(const std::string& s) {
  std::uint64_t h = fnv1a64(s.data(), s.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace tbtrap
