#include "bodega/filters.hpp"

#include <cmath>
#include <unordered_map>

#include "bodega/hashing.hpp"

namespace bodega {

std::uint32_t optimal_hash_count(std::uint64_t n_bits, std::uint64_t n) {
    if (n == 0) throw InvalidInput("optimal_hash_count: set size must be >= 1");
    if (n_bits == 0) throw InvalidInput("optimal_hash_count: bit count must be >= 1");
    double k = std::log(2.0) * static_cast<double>(n_bits) / static_cast<double>(n);
    auto rounded = static_cast<std::uint64_t>(std::llround(k));
    return static_cast<std::uint32_t>(std::max<std::uint64_t>(1, rounded));
}

// --- ClassicBloom ---

ClassicBloom ClassicBloom::build(const KeyedSet& s, BloomParams params, std::uint64_t seed) {
    params.validate();
    ClassicBloom f;
    f.params_ = params;
    f.bits_.assign((params.n_bits + 63) / 64, 0);
    Rng rng(derive_seed(seed, 0xb100f));
    f.hash_seeds_.reserve(params.n_hashes);
    for (std::uint32_t i = 0; i < params.n_hashes; ++i) f.hash_seeds_.push_back(rng());
    for (const Element& e : s.elements()) f.insert(e.id);
    return f;
}

std::uint64_t ClassicBloom::probe(const ElementId& x, std::uint32_t i) const {
    return reduce_range(hash_element(x, hash_seeds_[i]), params_.n_bits);
}

void ClassicBloom::insert(const ElementId& x) {
    for (std::uint32_t i = 0; i < params_.n_hashes; ++i) {
        std::uint64_t bit = probe(x, i);
        bits_[bit >> 6] |= (1ULL << (bit & 63));
    }
}

bool ClassicBloom::query_id(const ElementId& x) const {
    for (std::uint32_t i = 0; i < params_.n_hashes; ++i) {
        std::uint64_t bit = probe(x, i);
        if (!(bits_[bit >> 6] & (1ULL << (bit & 63)))) return false;
    }
    return true;
}

Bytes ClassicBloom::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::ClassicBloom));
    wire::put_u64(out, params_.n_bits);
    wire::put_u32(out, params_.n_hashes);
    wire::put_u64(out, params_.expected_n);
    for (std::uint64_t s : hash_seeds_) wire::put_u64(out, s);
    for (std::uint64_t w : bits_) wire::put_u64(out, w);
    return out;
}

ClassicBloom ClassicBloom::deserialize(wire::Reader& r) {
    if (r.u32() != wire::kMagic) throw DataError("bad snapshot magic");
    if (r.u16() != wire::kVersion) throw DataError("unsupported snapshot version");
    if (r.u16() != static_cast<std::uint16_t>(wire::Kind::ClassicBloom))
        throw DataError("snapshot is not a classic bloom filter");
    ClassicBloom f;
    f.params_.n_bits = r.u64();
    f.params_.n_hashes = r.u32();
    f.params_.expected_n = r.u64();
    f.params_.validate();
    f.hash_seeds_.resize(f.params_.n_hashes);
    for (auto& s : f.hash_seeds_) s = r.u64();
    f.bits_.resize((f.params_.n_bits + 63) / 64);
    for (auto& w : f.bits_) w = r.u64();
    return f;
}

MemoryReport ClassicBloom::memory_report() const {
    MemoryReport m;
    m.backup_a_bytes = (params_.n_bits + 7) / 8;
    return m;
}

// --- NyCbf ---

NyCbf::NyCbf(ClassicBloom inner, SecretKey key) : inner_(std::move(inner)), prp_(key) {}

NyCbf NyCbf::build(const KeyedSet& s, BloomParams params, SecretKey key, std::uint64_t seed) {
    Prp prp(key);
    std::vector<ElementId> permuted;
    permuted.reserve(s.size());
    for (const Element& e : s.elements()) permuted.push_back(prp.apply(e.id));
    return NyCbf(ClassicBloom::build(KeyedSet::from_ids(permuted), params, seed), key);
}

Bytes NyCbf::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::NyCbf));
    Bytes inner = inner_.serialize();
    wire::put_u64(out, inner.size());
    out.insert(out.end(), inner.begin(), inner.end());
    return out;
}

MemoryReport NyCbf::memory_report() const {
    MemoryReport m = inner_.memory_report();
    m.key_bits = prp_.key().lambda_bits();
    return m;
}

// --- NoyCuckoo ---

CuckooParams CuckooParams::for_load(std::uint64_t expected_n, double size_factor,
                                    unsigned fingerprint_bits, std::uint32_t max_evictions) {
    CuckooParams p;
    p.size_factor = size_factor;
    p.fingerprint_bits = fingerprint_bits;
    p.max_evictions = max_evictions;
    p.cells_per_table = std::max<std::uint64_t>(
        1, static_cast<std::uint64_t>(std::ceil(size_factor * static_cast<double>(expected_n) / 2.0)));
    return p;
}

CuckooParams CuckooParams::for_memory(std::uint64_t budget_bytes, unsigned fingerprint_bits,
                                      std::uint32_t max_evictions) {
    CuckooParams p;
    p.fingerprint_bits = fingerprint_bits;
    p.max_evictions = max_evictions;
    p.cells_per_table = (budget_bytes * 8) / (2 * fingerprint_bits);
    if (p.cells_per_table == 0) throw ConfigError("cuckoo budget too small for even one cell");
    return p;
}

void CuckooParams::validate() const {
    if (cells_per_table < 1) throw ConfigError("cuckoo table needs at least one cell");
    if (fingerprint_bits < 1 || fingerprint_bits > 16)
        throw ConfigError("cuckoo fingerprints must be 1..16 bits");
    if (size_factor <= 1.0) throw ConfigError("cuckoo size factor must exceed 1");
}

std::uint16_t NoyCuckoo::fingerprint(const ElementId& x, unsigned side) const {
    // Remap into [1, 2^r - 1]; 0 is the empty-cell marker.
    std::uint64_t raw = prf_->eval(x, side);
    std::uint64_t space = (1ULL << params_.fingerprint_bits) - 1;
    return static_cast<std::uint16_t>(raw % space + 1);
}

std::uint64_t NoyCuckoo::slot(const ElementId& x, unsigned side) const {
    std::uint64_t seed = side == 1 ? h1_seed_ : h2_seed_;
    return reduce_range(hash_element(x, seed), params_.cells_per_table);
}

NoyCuckoo NoyCuckoo::build(const KeyedSet& s, CuckooParams params, SecretKey key,
                           std::uint64_t seed) {
    params.validate();
    NoyCuckoo f;
    f.params_ = params;
    Rng rng(derive_seed(seed, 0xc0c0));
    f.h1_seed_ = rng();
    f.h2_seed_ = rng();
    f.z1_.assign(params.cells_per_table, 0);
    f.z2_.assign(params.cells_per_table, 0);
    f.prf_.emplace(key, params.fingerprint_bits);

    // Fingerprints are not invertible, so evictions need the original
    // elements; the shadow tables live only for the duration of the build.
    std::vector<std::optional<ElementId>> shadow1(params.cells_per_table);
    std::vector<std::optional<ElementId>> shadow2(params.cells_per_table);

    for (const Element& e : s.elements()) {
        ElementId cur = e.id;
        unsigned side = 1;
        bool placed = false;
        for (std::uint32_t attempt = 0; attempt <= params.max_evictions; ++attempt) {
            auto& shadow = side == 1 ? shadow1 : shadow2;
            auto& table = side == 1 ? f.z1_ : f.z2_;
            std::uint64_t cell = f.slot(cur, side);
            if (!shadow[cell]) {
                shadow[cell] = cur;
                table[cell] = f.fingerprint(cur, side);
                placed = true;
                break;
            }
            ElementId evicted = *shadow[cell];
            shadow[cell] = cur;
            table[cell] = f.fingerprint(cur, side);
            cur = evicted;
            side = side == 1 ? 2 : 1;
        }
        if (!placed) f.skipped_.push_back(cur);
    }
    return f;
}

bool NoyCuckoo::query_id(const ElementId& x) const {
    return z1_[slot(x, 1)] == fingerprint(x, 1) || z2_[slot(x, 2)] == fingerprint(x, 2);
}

double NoyCuckoo::load() const {
    std::uint64_t occupied = 0;
    for (auto v : z1_) occupied += v != 0;
    for (auto v : z2_) occupied += v != 0;
    return static_cast<double>(occupied) / static_cast<double>(2 * params_.cells_per_table);
}

Bytes NoyCuckoo::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::NoyCuckoo));
    wire::put_u64(out, params_.cells_per_table);
    wire::put_u8(out, static_cast<std::uint8_t>(params_.fingerprint_bits));
    wire::put_u32(out, params_.max_evictions);
    wire::put_u64(out, h1_seed_);
    wire::put_u64(out, h2_seed_);
    for (auto v : z1_) wire::put_u16(out, v);
    for (auto v : z2_) wire::put_u16(out, v);
    wire::put_u64(out, skipped_.size());
    for (const ElementId& id : skipped_)
        out.insert(out.end(), id.bytes.begin(), id.bytes.end());
    return out;
}

MemoryReport NoyCuckoo::memory_report() const {
    MemoryReport m;
    m.backup_a_bytes = (2 * params_.cells_per_table * params_.fingerprint_bits + 7) / 8;
    m.key_bits = prf_->key().lambda_bits();
    return m;
}

}  // namespace bodega
