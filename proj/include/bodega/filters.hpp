#pragma once

#include <memory>
#include <optional>
#include <string_view>

#include "bodega/crypto.hpp"
#include "bodega/domain.hpp"

namespace bodega {

/// Byte/bit accounting for a built filter. `total_bytes` covers the model,
/// both backup payloads and the key overhead; container headers are not
/// charged against the budget.
struct MemoryReport {
    std::uint64_t model_bytes = 0;
    std::uint64_t backup_a_bytes = 0;
    std::uint64_t backup_b_bytes = 0;
    std::uint64_t key_bits = 0;

    std::uint64_t total_bytes() const {
        return model_bytes + backup_a_bytes + backup_b_bytes + (key_bits + 7) / 8;
    }
};

/// Common query surface shared by all constructions, the pathological
/// counterexamples included. Snapshots are immutable once built (steady
/// setting); serialize() returns the versioned key-free representation that
/// game oracles may see.
class Filter {
  public:
    virtual ~Filter() = default;
    virtual bool contains(const Element& q) const = 0;
    virtual Bytes serialize() const = 0;
    virtual MemoryReport memory_report() const = 0;
    virtual std::string_view kind_name() const = 0;
};

struct BloomParams {
    std::uint64_t n_bits = 0;
    std::uint32_t n_hashes = 0;
    std::uint64_t expected_n = 0;

    void validate() const {
        if (n_bits < 1 || n_hashes < 1) throw ConfigError("bloom parameters must be >= 1");
    }
};

/// round(ln 2 * n_bits / n), clamped to >= 1.
std::uint32_t optimal_hash_count(std::uint64_t n_bits, std::uint64_t n);

class ClassicBloom final : public Filter {
  public:
    static ClassicBloom build(const KeyedSet& s, BloomParams params, std::uint64_t seed);
    static ClassicBloom deserialize(wire::Reader& r);

    /// Raw-id query used by keyed wrappers that permute before probing.
    bool query_id(const ElementId& x) const;

    bool contains(const Element& q) const override { return query_id(q.id); }
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "classic"; }

    const BloomParams& params() const { return params_; }

  private:
    void insert(const ElementId& x);
    std::uint64_t probe(const ElementId& x, std::uint32_t i) const;

    BloomParams params_;
    std::vector<std::uint64_t> hash_seeds_;
    std::vector<std::uint64_t> bits_;
};

/// PRP-hardened bloom filter: stores and queries PRP_sk(x) in an inner
/// classic filter. The key never enters the serialized snapshot.
class NyCbf final : public Filter {
  public:
    static NyCbf build(const KeyedSet& s, BloomParams params, SecretKey key, std::uint64_t seed);
    NyCbf(ClassicBloom inner, SecretKey key);

    bool query_id(const ElementId& x) const { return inner_.query_id(prp_.apply(x)); }

    bool contains(const Element& q) const override { return query_id(q.id); }
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "ny"; }

    const ClassicBloom& inner() const { return inner_; }
    const Prp& prp() const { return prp_; }

  private:
    ClassicBloom inner_;
    Prp prp_;
};

struct CuckooParams {
    std::uint64_t cells_per_table = 0;
    unsigned fingerprint_bits = 4;
    double size_factor = 2.0;
    std::uint32_t max_evictions = 5000;

    /// Tables sized for an expected occupancy: size_factor * n total cells.
    static CuckooParams for_load(std::uint64_t expected_n, double size_factor = 2.0,
                                 unsigned fingerprint_bits = 4,
                                 std::uint32_t max_evictions = 5000);

    /// Tables sized to fill a byte budget: 2 * cells * r bits = 8 * bytes.
    static CuckooParams for_memory(std::uint64_t budget_bytes, unsigned fingerprint_bits = 4,
                                   std::uint32_t max_evictions = 5000);

    void validate() const;
};

/// Two-table cuckoo filter storing keyed PRF fingerprints. Fingerprint 0
/// marks an empty cell; stored fingerprints are remapped into [1, 2^r - 1].
/// Elements abandoned after the eviction cap are reported in `skipped`,
/// never silently dropped.
class NoyCuckoo final : public Filter {
  public:
    static NoyCuckoo build(const KeyedSet& s, CuckooParams params, SecretKey key,
                           std::uint64_t seed);

    bool query_id(const ElementId& x) const;

    bool contains(const Element& q) const override { return query_id(q.id); }
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "cuckoo"; }

    const CuckooParams& params() const { return params_; }
    const std::vector<ElementId>& skipped() const { return skipped_; }
    double load() const;

  private:
    std::uint16_t fingerprint(const ElementId& x, unsigned side) const;
    std::uint64_t slot(const ElementId& x, unsigned side) const;

    CuckooParams params_;
    std::uint64_t h1_seed_ = 0, h2_seed_ = 0;
    std::vector<std::uint16_t> z1_, z2_;  // 0 = empty
    std::optional<Prf> prf_;
    std::vector<ElementId> skipped_;
};

}  // namespace bodega
