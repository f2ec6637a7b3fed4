#pragma once

#include "bodega/filters.hpp"
#include "bodega/learned.hpp"

namespace bodega {

/// Scorer plus threshold: partitions any key set into the score >= tau side
/// (A) and the score < tau side (B). Exhaustive and disjoint by construction.
struct LearnedPartitioner {
    ScorerPtr scorer;
    double tau = 0.5;

    bool above(const RawKey& raw) const { return scorer->score(raw) >= tau; }
};

enum class FilterKind {
    Classic,
    Ny,
    Cuckoo,
    Standard,
    Bodega,
    CuckooLbf,
    Trivial,
};

std::string_view filter_kind_name(FilterKind kind);
FilterKind parse_filter_kind(std::string_view name);

/// Byte budget for a learned construction. Backup budgets are derived from
/// the total, the model allocation and the split rule during the build.
struct MemoryBudget {
    std::uint64_t total_bytes = 20480;
    std::uint64_t model_budget_bytes = 10240;
    /// true: backups get total - model_budget (the model's slot is reserved
    /// whole); false: backups get total - measured model size.
    bool reserve_model_budget = false;
    bool proportional_split = false;
    std::uint32_t lambda_bits = 128;
};

struct LbfBuildConfig {
    FilterKind kind = FilterKind::Bodega;
    MemoryBudget budget;
    ThresholdPolicy threshold;
    unsigned fingerprint_bits = 4;
    std::uint32_t max_evictions = 5000;
    /// Off only for the relaxed poisoning game, where the challenger
    /// accepts an adversary-chosen dataset without checking it.
    bool validate_dataset = true;
    /// Reuse a previously trained scorer instead of running training.
    ScorerPtr pretrained;
};

enum class Route { ModelPositive, BackupA, BackupB };

/// Standard LBF baseline: model positives bypass the backup entirely; only
/// the score < tau members are stored, in a plain (unkeyed) bloom filter.
class StandardLbf final : public Filter {
  public:
    StandardLbf(LearnedPartitioner partitioner, ClassicBloom backup, std::uint64_t n_a);

    Route route(const Element& q) const;
    bool contains(const Element& q) const override;
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "standard"; }

    const LearnedPartitioner& partitioner() const { return partitioner_; }
    const ClassicBloom& backup() const { return backup_; }

  private:
    LearnedPartitioner partitioner_;
    ClassicBloom backup_;
    std::uint64_t n_a_;
};

/// Partitioned construction with two PRP-hardened backup CBFs; every query
/// traverses exactly one of them.
class BodegaLbf final : public Filter {
  public:
    BodegaLbf(LearnedPartitioner partitioner, NyCbf backup_a, NyCbf backup_b);

    Route route(const Element& q) const;
    bool contains(const Element& q) const override;
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "bodega"; }

    const LearnedPartitioner& partitioner() const { return partitioner_; }
    const NyCbf& backup_a() const { return backup_a_; }
    const NyCbf& backup_b() const { return backup_b_; }

  private:
    LearnedPartitioner partitioner_;
    NyCbf backup_a_, backup_b_;
};

/// Partitioned construction over two keyed-fingerprint cuckoo tables.
class CuckooLbf final : public Filter {
  public:
    CuckooLbf(LearnedPartitioner partitioner, NoyCuckoo backup_a, NoyCuckoo backup_b);

    Route route(const Element& q) const;
    bool contains(const Element& q) const override;
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "cuckoo-lbf"; }

    const LearnedPartitioner& partitioner() const { return partitioner_; }
    const NoyCuckoo& backup_a() const { return backup_a_; }
    const NoyCuckoo& backup_b() const { return backup_b_; }
    std::uint64_t skipped_count() const {
        return backup_a_.skipped().size() + backup_b_.skipped().size();
    }

  private:
    LearnedPartitioner partitioner_;
    NoyCuckoo backup_a_, backup_b_;
};

/// Always-negative model in front of a hardened backup holding all of S.
class TrivialModelLbf final : public Filter {
  public:
    TrivialModelLbf(NyCbf backup);

    Route route(const Element&) const { return Route::BackupB; }
    bool contains(const Element& q) const override { return backup_.query_id(q.id); }
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "trivial"; }

    const NyCbf& backup() const { return backup_; }

  private:
    LearnedPartitioner partitioner_;
    NyCbf backup_;
};

struct SnapshotMeta {
    FilterKind kind = FilterKind::Classic;
    std::uint64_t n = 0;
    std::uint64_t n_a = 0;
    std::uint64_t n_b = 0;
    double tau = 0.0;
    std::uint64_t skipped = 0;
};

/// Immutable post-build handle: the filter, its build metadata and an
/// optional (non-serialized) scorer handle for diagnostics.
struct FilterSnapshot {
    std::shared_ptr<const Filter> filter;
    SnapshotMeta meta;
    ScorerPtr scorer;

    bool contains(const Element& q) const { return filter->contains(q); }
    Bytes serialize() const { return filter->serialize(); }
    MemoryReport memory_report() const { return filter->memory_report(); }
};

/// Builds a learned construction from a key set and training dataset.
/// Throws ConfigError on infeasible budgets, InvalidInput on an invalid T.
FilterSnapshot lbf_build(const LbfBuildConfig& config, const KeyedSet& s,
                         const TrainingDataset& t, std::uint64_t seed);

bool lbf_query(const FilterSnapshot& f, const ElementId& x, const RawKey& raw);

/// Uniform build entry point covering the plain filters as well; LBF kinds
/// require a training dataset.
struct FilterBuildConfig {
    FilterKind kind = FilterKind::Classic;
    std::uint64_t total_bytes = 20480;
    std::uint64_t model_budget_bytes = 10240;
    bool reserve_model_budget = false;
    bool proportional_split = false;
    ThresholdPolicy threshold;
    unsigned fingerprint_bits = 4;
    std::uint32_t max_evictions = 5000;
    bool validate_dataset = true;
    ScorerPtr pretrained;
};

FilterSnapshot build_filter(const FilterBuildConfig& config, const KeyedSet& s,
                            const TrainingDataset* t, std::uint64_t seed);

}  // namespace bodega
