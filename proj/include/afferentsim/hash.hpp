#ifndef AFFERENTSIM_HASH_HPP
#define AFFERENTSIM_HASH_HPP

#include <cstdint>
#include <string>
#include <string_view>

namespace afferentsim {

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// 16 lowercase hex digits.
std::string hex64(std::uint64_t value);

inline std::string content_hash(std::string_view data) { return hex64(fnv1a(data)); }

}  // namespace afferentsim

#endif  // AFFERENTSIM_HASH_HPP
