#include <doctest.h>

#include <cmath>
#include <cstring>
#include <unordered_set>

#include "bodega/analytic.hpp"
#include "bodega/lbf.hpp"
#include "bodega/urlgen.hpp"

using namespace bodega;

namespace {

struct Fixture {
    UrlCorpus corpus;
    KeyedSet s;
    TrainingDataset t;

    explicit Fixture(std::size_t n = 2000, std::uint64_t seed = 17)
        : corpus(generate_url_corpus({n, 2 * n, seed})),
          s(KeyedSet::from_raw_keys(corpus.malicious)),
          t(build_training_dataset(s, corpus.benign, seed)) {}
};

LbfBuildConfig desk_config(FilterKind kind) {
    LbfBuildConfig config;
    config.kind = kind;
    config.budget.total_bytes = 20480;
    config.budget.model_budget_bytes = 2048;
    return config;
}

bool bytes_contain(const Bytes& haystack, const std::uint8_t* needle, std::size_t len) {
    for (std::size_t i = 0; i + len <= haystack.size(); ++i)
        if (std::memcmp(haystack.data() + i, needle, len) == 0) return true;
    return false;
}

}  // namespace

TEST_CASE("filter kind names round-trip") {
    for (FilterKind k : {FilterKind::Classic, FilterKind::Ny, FilterKind::Cuckoo,
                         FilterKind::Standard, FilterKind::Bodega, FilterKind::CuckooLbf,
                         FilterKind::Trivial})
        CHECK(parse_filter_kind(filter_kind_name(k)) == k);
    CHECK_THROWS_AS(parse_filter_kind("nope"), ConfigError);
}

TEST_CASE("trivial kind routes the whole set to the hardened backup") {
    Fixture fx(1000);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Trivial), fx.s, fx.t, 3);
    CHECK(snap.meta.n_a == 0);
    CHECK(snap.meta.n_b == fx.s.size());
    for (const Element& e : fx.s.elements()) REQUIRE(snap.contains(e));
}

TEST_CASE("partition sizes are exhaustive across seeds") {
    Fixture fx(800);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        FilterSnapshot snap = lbf_build(desk_config(FilterKind::Bodega), fx.s, fx.t, seed);
        CHECK(snap.meta.n_a + snap.meta.n_b == fx.s.size());
    }
}

TEST_CASE("learned kinds are complete on their members") {
    Fixture fx(1500);
    for (FilterKind kind : {FilterKind::Standard, FilterKind::Bodega, FilterKind::Trivial}) {
        FilterSnapshot snap = lbf_build(desk_config(kind), fx.s, fx.t, 5);
        for (const Element& e : fx.s.elements()) REQUIRE(snap.contains(e));
    }
}

TEST_CASE("cuckoo lbf is complete outside its reported skips") {
    Fixture fx(1200);
    LbfBuildConfig config = desk_config(FilterKind::CuckooLbf);
    config.budget.total_bytes = 1 << 15;
    FilterSnapshot snap = lbf_build(config, fx.s, fx.t, 7);
    const auto* filter = dynamic_cast<const CuckooLbf*>(snap.filter.get());
    REQUIRE(filter != nullptr);
    std::unordered_set<ElementId, ElementIdHash> skipped;
    for (const ElementId& id : filter->backup_a().skipped()) skipped.insert(id);
    for (const ElementId& id : filter->backup_b().skipped()) skipped.insert(id);
    CHECK(skipped.size() == snap.meta.skipped);
    for (const Element& e : fx.s.elements())
        if (!skipped.count(e.id)) REQUIRE(snap.contains(e));
}

TEST_CASE("bodega query equals the hand-composed routed backup answer") {
    Fixture fx(1000);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Bodega), fx.s, fx.t, 11);
    const auto* bodega = dynamic_cast<const BodegaLbf*>(snap.filter.get());
    REQUIRE(bodega != nullptr);
    Rng rng(23);
    for (int i = 0; i < 5000; ++i) {
        Element q = i % 2 ? Element::random(rng)
                          : Element::from_raw(fx.corpus.benign[static_cast<std::size_t>(
                                rng() % fx.corpus.benign.size())]);
        bool expected = bodega->partitioner().above(q.raw)
                            ? bodega->backup_a().query_id(q.id)
                            : bodega->backup_b().query_id(q.id);
        CHECK(snap.contains(q) == expected);
    }
}

TEST_CASE("every query routes to exactly one side") {
    Fixture fx(600);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Bodega), fx.s, fx.t, 13);
    const auto* bodega = dynamic_cast<const BodegaLbf*>(snap.filter.get());
    Rng rng(29);
    std::uint64_t to_a = 0, to_b = 0;
    constexpr int kProbes = 1000;
    for (int i = 0; i < kProbes; ++i) {
        Route r = bodega->route(Element::random(rng));
        to_a += r == Route::BackupA;
        to_b += r == Route::BackupB;
    }
    CHECK(to_a + to_b == kProbes);
}

TEST_CASE("table-1 proportions at desk scale land on the reserved split") {
    Fixture fx(1700);
    LbfBuildConfig config;
    config.kind = FilterKind::Bodega;
    config.budget.total_bytes = 20480;
    config.budget.model_budget_bytes = 10240;
    config.budget.reserve_model_budget = true;
    FilterSnapshot snap = lbf_build(config, fx.s, fx.t, 15);
    MemoryReport mem = snap.memory_report();
    // backups share total - reserved model - two keys: 10208 bytes
    CHECK(mem.backup_a_bytes + mem.backup_b_bytes == 20480 - 10240 - 32);
    CHECK(std::llabs(static_cast<long long>(mem.backup_a_bytes) -
                     static_cast<long long>(mem.backup_b_bytes)) <= 1);
    CHECK(mem.key_bits == 256);
    CHECK(mem.total_bytes() <= 20480);
}

TEST_CASE("memory reports stay within the configured budget") {
    Fixture fx(900);
    for (FilterKind kind : {FilterKind::Standard, FilterKind::Bodega, FilterKind::Trivial}) {
        FilterSnapshot snap = lbf_build(desk_config(kind), fx.s, fx.t, 17);
        CHECK(snap.memory_report().total_bytes() <= 20480);
    }
    FilterSnapshot trivial = lbf_build(desk_config(FilterKind::Trivial), fx.s, fx.t, 18);
    CHECK(trivial.memory_report().model_bytes == 8);
}

TEST_CASE("infeasible budgets are configuration errors") {
    Fixture fx(500);
    LbfBuildConfig config = desk_config(FilterKind::Bodega);
    config.budget.total_bytes = 64;
    config.budget.model_budget_bytes = 64;
    CHECK_THROWS_AS(lbf_build(config, fx.s, fx.t, 1), ConfigError);

    LbfBuildConfig tight = desk_config(FilterKind::CuckooLbf);
    tight.budget.total_bytes = 512;  // cells cannot hold the partition
    CHECK_THROWS_AS(lbf_build(tight, fx.s, fx.t, 1), ConfigError);
}

TEST_CASE("an inconsistent training dataset is rejected up front") {
    Fixture fx(300);
    TrainingDataset bad = fx.t;
    bad.examples.push_back({fx.corpus.malicious[0], canonicalize(fx.corpus.malicious[0]),
                            false});
    CHECK_THROWS_AS(lbf_build(desk_config(FilterKind::Bodega), fx.s, bad, 1), InvalidInput);
}

TEST_CASE("snapshots are steady under query load") {
    Fixture fx(700);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Bodega), fx.s, fx.t, 19);
    Bytes before = snap.serialize();
    Rng rng(31);
    for (int i = 0; i < 10000; ++i) snap.contains(Element::random(rng));
    for (const Element& e : fx.s.elements()) snap.contains(e);
    CHECK(snap.serialize() == before);
}

TEST_CASE("bodega snapshots never leak either key") {
    Fixture fx(400);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Bodega), fx.s, fx.t, 21);
    const auto* bodega = dynamic_cast<const BodegaLbf*>(snap.filter.get());
    Bytes blob = snap.serialize();
    const auto& key_a = bodega->backup_a().prp().key().material();
    const auto& key_b = bodega->backup_b().prp().key().material();
    CHECK(!bytes_contain(blob, key_a.data(), key_a.size()));
    CHECK(!bytes_contain(blob, key_b.data(), key_b.size()));
}

TEST_CASE("lbf_query wraps the element pair") {
    Fixture fx(300);
    FilterSnapshot snap = lbf_build(desk_config(FilterKind::Standard), fx.s, fx.t, 23);
    const Element& e = fx.s.elements().front();
    CHECK(lbf_query(snap, e.id, e.raw));
}

TEST_CASE("single-query adversarial rate is bounded by the weaker backup") {
    // For a fixed query, the FP probability over build randomness cannot
    // exceed the weaker backup's measured rate.
    Fixture fx(400, 41);
    LbfBuildConfig config = desk_config(FilterKind::Bodega);
    config.budget.total_bytes = 2048;  // small so rates are visible
    config.budget.model_budget_bytes = 512;

    Rng rng(43);
    Element probe = Element::random(rng);
    constexpr int kRebuilds = 200;
    int fp = 0;
    double worst_backup = 0.0;
    for (int i = 0; i < kRebuilds; ++i) {
        FilterSnapshot snap = lbf_build(config, fx.s, fx.t, derive_seed(1000, i));
        fp += snap.contains(probe);
        if (i == 0) {
            const auto* bodega = dynamic_cast<const BodegaLbf*>(snap.filter.get());
            int hit_a = 0, hit_b = 0;
            constexpr int kProbes = 20000;
            Rng prng(45);
            for (int j = 0; j < kProbes; ++j) {
                ElementId x = ElementId::random(prng);
                hit_a += bodega->backup_a().query_id(x);
                hit_b += bodega->backup_b().query_id(x);
            }
            worst_backup = std::max(hit_a, hit_b) / static_cast<double>(kProbes);
        }
    }
    double rate = static_cast<double>(fp) / kRebuilds;
    double sigma = std::sqrt(std::max(worst_backup * (1 - worst_backup), 1e-6) / kRebuilds);
    CHECK(rate <= worst_backup + 3 * sigma);
}

TEST_CASE("small-scale measured fpr tracks the composition of component rates") {
    Fixture fx(2000, 47);
    LbfBuildConfig config = desk_config(FilterKind::Bodega);
    FilterSnapshot snap = lbf_build(config, fx.s, fx.t, 25);
    const auto* bodega = dynamic_cast<const BodegaLbf*>(snap.filter.get());

    // component rates measured independently
    Rng rng(49);
    constexpr int kProbes = 40000;
    int hit_a = 0, hit_b = 0;
    for (int i = 0; i < kProbes; ++i) {
        ElementId x = ElementId::random(rng);
        hit_a += bodega->backup_a().query_id(x);
        hit_b += bodega->backup_b().query_id(x);
    }
    double fp_a = hit_a / static_cast<double>(kProbes);
    double fp_b = hit_b / static_cast<double>(kProbes);

    UrlCorpus eval = generate_url_corpus({10, 30000, 1049});
    std::vector<RawKey> benign;
    for (const RawKey& k : eval.benign)
        if (!fx.s.contains(canonicalize(k))) benign.push_back(k);

    std::uint64_t above = 0, fp = 0;
    for (const RawKey& k : benign) {
        Element e = Element::from_raw(k);
        above += bodega->partitioner().above(k);
        fp += snap.contains(e);
    }
    double fp_l = above / static_cast<double>(benign.size());
    double measured = fp / static_cast<double>(benign.size());
    double predicted = lbf_fpr_composed(fp_l, fp_a, 1.0 - fp_l, fp_b);
    double sigma = std::sqrt(std::max(predicted * (1 - predicted), 1e-9) /
                             static_cast<double>(benign.size()));
    CHECK(std::abs(measured - predicted) <= 4 * sigma + 1e-4);
}
