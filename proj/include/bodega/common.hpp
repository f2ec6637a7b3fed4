#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace bodega {

using Bytes = std::vector<std::uint8_t>;
using Rng = std::mt19937_64;

/// Thrown when an operation receives an argument outside its domain.
struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a requested configuration cannot be instantiated
/// (unsupported parameter, infeasible memory budget, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Thrown on malformed external data (dataset files, snapshots).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Canonical 128-bit domain element. Ordering and equality are bitwise
/// (big-endian lexicographic over the 16 bytes).
struct ElementId {
    std::array<std::uint8_t, 16> bytes{};

    auto operator<=>(const ElementId&) const = default;

    static ElementId random(Rng& rng) {
        ElementId id;
        for (int i = 0; i < 16; i += 8) {
            std::uint64_t w = rng();
            std::memcpy(id.bytes.data() + i, &w, 8);
        }
        return id;
    }

    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string out(32, '0');
        for (int i = 0; i < 16; ++i) {
            out[2 * i] = digits[bytes[i] >> 4];
            out[2 * i + 1] = digits[bytes[i] & 0xf];
        }
        return out;
    }
};

struct ElementIdHash {
    std::size_t operator()(const ElementId& id) const noexcept {
        std::uint64_t a, b;
        std::memcpy(&a, id.bytes.data(), 8);
        std::memcpy(&b, id.bytes.data() + 8, 8);
        a ^= b * 0x9e3779b97f4a7c15ULL;
        a ^= a >> 29;
        a *= 0xbf58476d1ce4e5b9ULL;
        a ^= a >> 32;
        return static_cast<std::size_t>(a);
    }
};

/// splitmix64 step, used to derive independent seed streams.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(master ^ mix64(stream + 0x51ed2701));
}

namespace wire {

// Snapshot kind tags (versioned binary layout, little-endian).
inline constexpr std::uint32_t kMagic = 0x46474442u;  // "BDGF"
inline constexpr std::uint16_t kVersion = 1;

enum class Kind : std::uint16_t {
    ClassicBloom = 1,
    NyCbf = 2,
    NoyCuckoo = 3,
    StandardLbf = 4,
    BodegaLbf = 5,
    CuckooLbf = 6,
    TrivialLbf = 7,
    RepeatTrigger = 8,
    KeyLeak = 9,
    CoinAlwaysOne = 10,
};

inline void put_u8(Bytes& b, std::uint8_t v) { b.push_back(v); }

inline void put_u16(Bytes& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(Bytes& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(Bytes& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_f64(Bytes& b, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(b, u);
}

struct Reader {
    const Bytes* data;
    std::size_t pos = 0;

    bool has(std::size_t n) const { return pos + n <= data->size(); }

    std::uint8_t u8() {
        require(1);
        return (*data)[pos++];
    }
    std::uint16_t u16() {
        require(2);
        std::uint16_t v = static_cast<std::uint16_t>((*data)[pos] | ((*data)[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>((*data)[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>((*data)[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        std::uint64_t u = u64();
        double v;
        std::memcpy(&v, &u, 8);
        return v;
    }
    void raw(std::uint8_t* out, std::size_t n) {
        require(n);
        std::memcpy(out, data->data() + pos, n);
        pos += n;
    }
    void require(std::size_t n) const {
        if (!has(n)) throw DataError("snapshot truncated");
    }
};

}  // namespace wire

}  // namespace bodega
