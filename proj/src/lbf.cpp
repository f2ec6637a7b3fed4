#include "bodega/lbf.hpp"

#include <algorithm>
#include <cmath>

namespace bodega {

namespace {

void append_scorer_and_tau(Bytes& out, const LearnedPartitioner& p) {
    Bytes blob = p.scorer->serialize();
    wire::put_f64(out, p.tau);
    wire::put_u64(out, blob.size());
    out.insert(out.end(), blob.begin(), blob.end());
}

void append_nested(Bytes& out, const Filter& f) {
    Bytes blob = f.serialize();
    wire::put_u64(out, blob.size());
    out.insert(out.end(), blob.begin(), blob.end());
}

Bytes serialize_partitioned(wire::Kind kind, const LearnedPartitioner& p, const Filter& a,
                            const Filter& b) {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(kind));
    append_scorer_and_tau(out, p);
    append_nested(out, a);
    append_nested(out, b);
    return out;
}

BloomParams bloom_params_for(std::uint64_t bytes, std::uint64_t n) {
    BloomParams p;
    p.n_bits = std::max<std::uint64_t>(1, bytes * 8);
    p.expected_n = n;
    p.n_hashes = n == 0 ? 1 : optimal_hash_count(p.n_bits, n);
    return p;
}

}  // namespace

std::string_view filter_kind_name(FilterKind kind) {
    switch (kind) {
        case FilterKind::Classic: return "classic";
        case FilterKind::Ny: return "ny";
        case FilterKind::Cuckoo: return "cuckoo";
        case FilterKind::Standard: return "standard";
        case FilterKind::Bodega: return "bodega";
        case FilterKind::CuckooLbf: return "cuckoo-lbf";
        case FilterKind::Trivial: return "trivial";
    }
    return "?";
}

FilterKind parse_filter_kind(std::string_view name) {
    for (FilterKind k : {FilterKind::Classic, FilterKind::Ny, FilterKind::Cuckoo,
                         FilterKind::Standard, FilterKind::Bodega, FilterKind::CuckooLbf,
                         FilterKind::Trivial})
        if (filter_kind_name(k) == name) return k;
    throw ConfigError("unknown filter kind: " + std::string(name));
}

// --- StandardLbf ---

StandardLbf::StandardLbf(LearnedPartitioner partitioner, ClassicBloom backup, std::uint64_t n_a)
    : partitioner_(std::move(partitioner)), backup_(std::move(backup)), n_a_(n_a) {}

Route StandardLbf::route(const Element& q) const {
    return partitioner_.above(q.raw) ? Route::ModelPositive : Route::BackupB;
}

bool StandardLbf::contains(const Element& q) const {
    if (route(q) == Route::ModelPositive) return true;
    return backup_.query_id(q.id);
}

Bytes StandardLbf::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::StandardLbf));
    append_scorer_and_tau(out, partitioner_);
    wire::put_u64(out, n_a_);
    append_nested(out, backup_);
    return out;
}

MemoryReport StandardLbf::memory_report() const {
    MemoryReport m;
    m.model_bytes = partitioner_.scorer->size_bytes();
    m.backup_b_bytes = (backup_.params().n_bits + 7) / 8;
    return m;
}

// --- BodegaLbf ---

BodegaLbf::BodegaLbf(LearnedPartitioner partitioner, NyCbf backup_a, NyCbf backup_b)
    : partitioner_(std::move(partitioner)),
      backup_a_(std::move(backup_a)),
      backup_b_(std::move(backup_b)) {}

Route BodegaLbf::route(const Element& q) const {
    return partitioner_.above(q.raw) ? Route::BackupA : Route::BackupB;
}

bool BodegaLbf::contains(const Element& q) const {
    return route(q) == Route::BackupA ? backup_a_.query_id(q.id) : backup_b_.query_id(q.id);
}

Bytes BodegaLbf::serialize() const {
    return serialize_partitioned(wire::Kind::BodegaLbf, partitioner_, backup_a_, backup_b_);
}

MemoryReport BodegaLbf::memory_report() const {
    MemoryReport m;
    m.model_bytes = partitioner_.scorer->size_bytes();
    m.backup_a_bytes = (backup_a_.inner().params().n_bits + 7) / 8;
    m.backup_b_bytes = (backup_b_.inner().params().n_bits + 7) / 8;
    m.key_bits = 2 * SecretKey::kLambdaBits;
    return m;
}

// --- CuckooLbf ---

CuckooLbf::CuckooLbf(LearnedPartitioner partitioner, NoyCuckoo backup_a, NoyCuckoo backup_b)
    : partitioner_(std::move(partitioner)),
      backup_a_(std::move(backup_a)),
      backup_b_(std::move(backup_b)) {}

Route CuckooLbf::route(const Element& q) const {
    return partitioner_.above(q.raw) ? Route::BackupA : Route::BackupB;
}

bool CuckooLbf::contains(const Element& q) const {
    return route(q) == Route::BackupA ? backup_a_.query_id(q.id) : backup_b_.query_id(q.id);
}

Bytes CuckooLbf::serialize() const {
    return serialize_partitioned(wire::Kind::CuckooLbf, partitioner_, backup_a_, backup_b_);
}

MemoryReport CuckooLbf::memory_report() const {
    MemoryReport m;
    m.model_bytes = partitioner_.scorer->size_bytes();
    m.backup_a_bytes = backup_a_.memory_report().backup_a_bytes;
    m.backup_b_bytes = backup_b_.memory_report().backup_a_bytes;
    m.key_bits = 2 * SecretKey::kLambdaBits;
    return m;
}

// --- TrivialModelLbf ---

TrivialModelLbf::TrivialModelLbf(NyCbf backup)
    : partitioner_{std::make_shared<TrivialScorer>(), 0.5}, backup_(std::move(backup)) {}

Bytes TrivialModelLbf::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::TrivialLbf));
    append_scorer_and_tau(out, partitioner_);
    append_nested(out, backup_);
    return out;
}

MemoryReport TrivialModelLbf::memory_report() const {
    MemoryReport m;
    m.model_bytes = partitioner_.scorer->size_bytes();
    m.backup_b_bytes = (backup_.inner().params().n_bits + 7) / 8;
    m.key_bits = SecretKey::kLambdaBits;
    return m;
}

// --- builds ---

FilterSnapshot lbf_build(const LbfBuildConfig& config, const KeyedSet& s,
                         const TrainingDataset& t, std::uint64_t seed) {
    if (config.validate_dataset && !validate_training_dataset(t, s))
        throw InvalidInput("training dataset is inconsistent with the stored set");

    const MemoryBudget& budget = config.budget;
    const bool trivial = config.kind == FilterKind::Trivial;

    ScorerPtr scorer = trivial ? ScorerPtr(std::make_shared<TrivialScorer>())
                       : config.pretrained
                           ? config.pretrained
                           : train_scorer(t, budget.model_budget_bytes,
                                          derive_seed(seed, 0x7a11));
    if (!trivial && scorer->size_bytes() > budget.model_budget_bytes)
        throw ConfigError("scorer exceeds the model budget");
    std::uint64_t model_used = scorer->size_bytes();
    std::uint64_t model_charged = budget.reserve_model_budget
                                      ? std::max<std::uint64_t>(budget.model_budget_bytes, model_used)
                                      : model_used;

    std::uint64_t key_bytes = 0;
    switch (config.kind) {
        case FilterKind::Bodega:
        case FilterKind::CuckooLbf: key_bytes = 2 * budget.lambda_bits / 8; break;
        case FilterKind::Trivial: key_bytes = budget.lambda_bits / 8; break;
        default: break;
    }
    if (budget.total_bytes < model_charged + key_bytes)
        throw ConfigError("memory budget cannot cover the model and key overhead");
    std::uint64_t backup_total = budget.total_bytes - model_charged - key_bytes;
    if (backup_total == 0) throw ConfigError("memory budget leaves no room for backups");

    double tau = 0.5;
    if (!trivial) {
        if (config.threshold.kind == ThresholdPolicy::Kind::FprMinimizing) {
            ThresholdBudget tb;
            tb.backup_bytes_total = backup_total;
            tb.proportional_split = budget.proportional_split;
            for (const LabeledExample& e : t.examples)
                if (!e.label) tb.negatives.push_back(e.key);
            tau = select_threshold(*scorer, s, config.threshold, &tb);
        } else {
            tau = select_threshold(*scorer, s, config.threshold);
        }
    }

    LearnedPartitioner partitioner{scorer, tau};
    std::vector<Element> side_a, side_b;
    for (const Element& e : s.elements())
        (partitioner.above(e.raw) ? side_a : side_b).push_back(e);
    KeyedSet set_a(std::move(side_a)), set_b(std::move(side_b));

    std::uint64_t m_a, m_b;
    if (budget.proportional_split && s.size() > 0) {
        m_a = static_cast<std::uint64_t>(std::llround(
            static_cast<double>(backup_total) * static_cast<double>(set_a.size()) /
            static_cast<double>(s.size())));
        m_a = std::min(m_a, backup_total);
        m_b = backup_total - m_a;
    } else {
        m_a = backup_total / 2;
        m_b = backup_total - m_a;
    }

    SnapshotMeta meta;
    meta.kind = config.kind;
    meta.n = s.size();
    meta.n_a = set_a.size();
    meta.n_b = set_b.size();
    meta.tau = tau;

    FilterSnapshot snap;
    snap.meta = meta;
    snap.scorer = scorer;

    switch (config.kind) {
        case FilterKind::Standard: {
            // Single unkeyed backup over the score < tau members; it gets
            // the whole backup budget.
            ClassicBloom backup = ClassicBloom::build(
                set_b, bloom_params_for(backup_total, set_b.size()), derive_seed(seed, 0xb));
            snap.filter = std::make_shared<StandardLbf>(partitioner, std::move(backup),
                                                        set_a.size());
            break;
        }
        case FilterKind::Bodega: {
            SecretKey sk_a = keygen(128, derive_seed(seed, 0x6ea1));
            SecretKey sk_b = keygen(128, derive_seed(seed, 0x6eb2));
            NyCbf a = NyCbf::build(set_a, bloom_params_for(m_a, set_a.size()), sk_a,
                                   derive_seed(seed, 0xa));
            NyCbf b = NyCbf::build(set_b, bloom_params_for(m_b, set_b.size()), sk_b,
                                   derive_seed(seed, 0xb));
            snap.filter = std::make_shared<BodegaLbf>(partitioner, std::move(a), std::move(b));
            break;
        }
        case FilterKind::CuckooLbf: {
            SecretKey sk_a = keygen(128, derive_seed(seed, 0x6ea1));
            SecretKey sk_b = keygen(128, derive_seed(seed, 0x6eb2));
            CuckooParams pa = CuckooParams::for_memory(std::max<std::uint64_t>(1, m_a),
                                                       config.fingerprint_bits,
                                                       config.max_evictions);
            CuckooParams pb = CuckooParams::for_memory(std::max<std::uint64_t>(1, m_b),
                                                       config.fingerprint_bits,
                                                       config.max_evictions);
            if (set_a.size() > 2 * pa.cells_per_table || set_b.size() > 2 * pb.cells_per_table)
                throw ConfigError("cuckoo backups cannot hold the partition at this budget");
            NoyCuckoo a = NoyCuckoo::build(set_a, pa, sk_a, derive_seed(seed, 0xa));
            NoyCuckoo b = NoyCuckoo::build(set_b, pb, sk_b, derive_seed(seed, 0xb));
            snap.meta.skipped = a.skipped().size() + b.skipped().size();
            snap.filter = std::make_shared<CuckooLbf>(partitioner, std::move(a), std::move(b));
            break;
        }
        case FilterKind::Trivial: {
            SecretKey sk = keygen(128, derive_seed(seed, 0x6ea1));
            NyCbf backup = NyCbf::build(s, bloom_params_for(backup_total, s.size()), sk,
                                        derive_seed(seed, 0xb));
            snap.filter = std::make_shared<TrivialModelLbf>(std::move(backup));
            snap.meta.n_a = 0;
            snap.meta.n_b = s.size();
            break;
        }
        default:
            throw ConfigError("lbf_build handles learned kinds only");
    }

    if (snap.memory_report().total_bytes() > budget.total_bytes)
        throw ConfigError("realized filter exceeds the memory budget");
    return snap;
}

bool lbf_query(const FilterSnapshot& f, const ElementId& x, const RawKey& raw) {
    return f.filter->contains(Element{x, raw});
}

FilterSnapshot build_filter(const FilterBuildConfig& config, const KeyedSet& s,
                            const TrainingDataset* t, std::uint64_t seed) {
    switch (config.kind) {
        case FilterKind::Classic: {
            FilterSnapshot snap;
            snap.meta.kind = config.kind;
            snap.meta.n = s.size();
            auto f = std::make_shared<ClassicBloom>(ClassicBloom::build(
                s, bloom_params_for(config.total_bytes, s.size()), derive_seed(seed, 0xb)));
            snap.filter = f;
            return snap;
        }
        case FilterKind::Ny: {
            FilterSnapshot snap;
            snap.meta.kind = config.kind;
            snap.meta.n = s.size();
            std::uint64_t lambda_bytes = SecretKey::kLambdaBits / 8;
            if (config.total_bytes <= lambda_bytes)
                throw ConfigError("budget cannot cover the PRP key");
            SecretKey sk = keygen(128, derive_seed(seed, 0x6ea1));
            snap.filter = std::make_shared<NyCbf>(NyCbf::build(
                s, bloom_params_for(config.total_bytes - lambda_bytes, s.size()), sk,
                derive_seed(seed, 0xb)));
            return snap;
        }
        case FilterKind::Cuckoo: {
            FilterSnapshot snap;
            snap.meta.kind = config.kind;
            snap.meta.n = s.size();
            std::uint64_t lambda_bytes = SecretKey::kLambdaBits / 8;
            if (config.total_bytes <= lambda_bytes)
                throw ConfigError("budget cannot cover the PRF key");
            CuckooParams p = CuckooParams::for_memory(config.total_bytes - lambda_bytes,
                                                      config.fingerprint_bits,
                                                      config.max_evictions);
            if (s.size() > 2 * p.cells_per_table)
                throw ConfigError("cuckoo filter cannot hold the set at this budget");
            SecretKey sk = keygen(128, derive_seed(seed, 0x6ea1));
            auto f = std::make_shared<NoyCuckoo>(
                NoyCuckoo::build(s, p, sk, derive_seed(seed, 0xb)));
            snap.meta.skipped = f->skipped().size();
            snap.filter = f;
            return snap;
        }
        default: {
            if (!t) throw ConfigError("learned filter kinds need a training dataset");
            LbfBuildConfig lbf;
            lbf.kind = config.kind;
            lbf.budget.total_bytes = config.total_bytes;
            lbf.budget.model_budget_bytes = config.model_budget_bytes;
            lbf.budget.reserve_model_budget = config.reserve_model_budget;
            lbf.budget.proportional_split = config.proportional_split;
            lbf.threshold = config.threshold;
            lbf.fingerprint_bits = config.fingerprint_bits;
            lbf.max_evictions = config.max_evictions;
            lbf.validate_dataset = config.validate_dataset;
            lbf.pretrained = config.pretrained;
            return lbf_build(lbf, s, *t, seed);
        }
    }
}

}  // namespace bodega
