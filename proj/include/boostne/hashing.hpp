#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace boostne {

/// Incremental 64-bit FNV-1a. Used for content fingerprints, not security.
class Fingerprint {
 public:
  Fingerprint& bytes(const void* data, std::size_t size) noexcept;
  Fingerprint& text(std::string_view s) noexcept { return bytes(s.data(), s.size()); }
  template <typename T>
  Fingerprint& value(const T& v) noexcept {
    return bytes(&v, sizeof(T));
  }
  template <typename T>
  Fingerprint& values(std::span<const T> v) noexcept {
    return bytes(v.data(), v.size_bytes());
  }

  std::uint64_t digest() const noexcept { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

std::string to_hex(std::uint64_t value);

/// Fingerprint of a file's bytes. Throws DataError when unreadable.
std::uint64_t file_fingerprint(const std::string& path);

/// splitmix64 step; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

}  // namespace boostne
