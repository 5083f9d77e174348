#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace nemclock {

/// 64-bit FNV-1a; stable across platforms, used for fingerprints and checksums.
[[nodiscard]] constexpr std::uint64_t fnv1a64(std::string_view bytes,
                                              std::uint64_t seed = 0xcbf29ce484222325ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

[[nodiscard]] inline std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

[[nodiscard]] inline std::string fingerprint_of(std::string_view bytes) {
    return to_hex(fnv1a64(bytes));
}

} // namespace nemclock
