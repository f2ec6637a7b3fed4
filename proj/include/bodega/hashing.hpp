#pragma once

#include "bodega/common.hpp"

namespace bodega {

/// Seeded non-cryptographic mixer for a 128-bit element. Index hashing for
/// the bloom/cuckoo tables only needs uniformity; adversarial hardness lives
/// in the keyed PRP/PRF layer in front of them.
inline std::uint64_t hash_element(const ElementId& id, std::uint64_t seed) {
    std::uint64_t a, b;
    std::memcpy(&a, id.bytes.data(), 8);
    std::memcpy(&b, id.bytes.data() + 8, 8);
    std::uint64_t h = seed ^ 0x2545f4914f6cdd1dULL;
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    return h;
}

/// Maps a 64-bit hash onto [0, n) without modulo bias (Lemire reduction).
inline std::uint64_t reduce_range(std::uint64_t h, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * n) >> 64);
}

}  // namespace bodega
