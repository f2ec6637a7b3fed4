#include <doctest.h>

#include <fstream>
#include <unordered_set>

#include "bodega/domain.hpp"
#include "bodega/urlgen.hpp"

using namespace bodega;

TEST_CASE("canonicalize is deterministic and pure") {
    RawKey key = "https://example.org/some/path?q=1";
    ElementId first = canonicalize(key);
    for (int i = 0; i < 100000; ++i) REQUIRE(canonicalize(key) == first);
}

TEST_CASE("16-byte keys embed verbatim") {
    RawKey key = "0123456789abcdef";
    ElementId id = canonicalize(key);
    CHECK(std::memcmp(id.bytes.data(), key.data(), 16) == 0);

    RawKey other = "0123456789abcdeX";
    CHECK(canonicalize(other) != id);
}

TEST_CASE("empty key is rejected") {
    CHECK_THROWS_AS(canonicalize(RawKey{}), InvalidInput);
}

TEST_CASE("a million distinct URLs canonicalize without collision") {
    UrlCorpus corpus = generate_url_corpus({400000, 600000, 42});
    std::unordered_set<ElementId, ElementIdHash> ids;
    ids.reserve(1 << 21);
    std::size_t total = 0;
    for (const auto* bucket : {&corpus.malicious, &corpus.benign}) {
        for (const RawKey& k : *bucket) {
            ids.insert(canonicalize(k));
            ++total;
        }
    }
    CHECK(total == 1000000);
    CHECK(ids.size() == total);  // oracle: exact set membership
}

TEST_CASE("keyed set deduplicates and orders by id") {
    std::vector<RawKey> keys = {"bb", "aa", "bb", "cc", "aa"};
    KeyedSet s = KeyedSet::from_raw_keys(keys);
    CHECK(s.size() == 3);
    for (std::size_t i = 1; i < s.elements().size(); ++i)
        CHECK(s.elements()[i - 1].id < s.elements()[i].id);
    CHECK(s.contains(canonicalize("aa")));
    CHECK(!s.contains(canonicalize("zz")));
}

TEST_CASE("training dataset: smallest valid case") {
    std::vector<RawKey> members = {"a-key", "b-key"};
    KeyedSet s = KeyedSet::from_raw_keys(members);
    std::vector<RawKey> pool = {"c-key"};
    TrainingDataset t = build_training_dataset(s, pool, 1);
    CHECK(t.positives() == 2);
    CHECK(t.negatives() == 1);
    CHECK(validate_training_dataset(t, s));
}

TEST_CASE("training dataset: empty pool gives empty negatives") {
    KeyedSet s = KeyedSet::from_raw_keys(std::vector<RawKey>{"a-key"});
    TrainingDataset t = build_training_dataset(s, {}, 1);
    CHECK(t.negatives() == 0);
    CHECK(validate_training_dataset(t, s));
}

TEST_CASE("training dataset: pool member inside S is named in the error") {
    KeyedSet s = KeyedSet::from_raw_keys(std::vector<RawKey>{"a-key", "b-key"});
    std::vector<RawKey> pool = {"fresh", "b-key"};
    try {
        build_training_dataset(s, pool, 1);
        FAIL("expected InvalidInput");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find("b-key") != std::string::npos);
    }
}

TEST_CASE("training dataset build is deterministic given the seed") {
    UrlCorpus corpus = generate_url_corpus({50, 100, 3});
    KeyedSet s = KeyedSet::from_raw_keys(corpus.malicious);
    TrainingDataset a = build_training_dataset(s, corpus.benign, 9);
    TrainingDataset b = build_training_dataset(s, corpus.benign, 9);
    REQUIRE(a.examples.size() == b.examples.size());
    for (std::size_t i = 0; i < a.examples.size(); ++i) {
        CHECK(a.examples[i].key == b.examples[i].key);
        CHECK(a.examples[i].label == b.examples[i].label);
    }
}

TEST_CASE("validation flags a label-0 example inside S") {
    KeyedSet s = KeyedSet::from_raw_keys(std::vector<RawKey>{"a-key", "b-key"});
    TrainingDataset t = build_training_dataset(s, std::vector<RawKey>{"fresh"}, 1);
    CHECK(validate_training_dataset(t, s));
    t.examples.push_back({"a-key", canonicalize("a-key"), false});
    CHECK(!validate_training_dataset(t, s));
}

TEST_CASE("validation over all seeds and pools holds by construction") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        KeyedSet s = KeyedSet::random(50, rng);
        std::vector<RawKey> pool;
        while (pool.size() < 30) {
            Element e = Element::random(rng);
            if (!s.contains(e.id)) pool.push_back(e.raw);
        }
        TrainingDataset t = build_training_dataset(s, pool, rng());
        CHECK(validate_training_dataset(t, s));
    }
}

TEST_CASE("dataset files count and skip malformed lines") {
    std::string path = "test_dataset_tmp.csv";
    {
        std::ofstream out(path, std::ios::binary);
        out << "1,http://one.example/a\n";
        out << "0,https://two.example/b\n";
        out << "2,badlabel.example\n";
        out << "no-comma-at-all\n";
        out << "\n";
        out << "0,https://three.example/c\n";
        out << "1,\n";  // empty key
    }
    DatasetFile data = load_dataset(path);
    CHECK(data.positives.size() == 1);
    CHECK(data.negatives.size() == 2);
    // oracle: 7 written lines minus 3 well-formed records
    CHECK(data.rejected_lines == 4);
    std::remove(path.c_str());
}

TEST_CASE("missing dataset file is a data error") {
    CHECK_THROWS_AS(load_dataset("does/not/exist.csv"), DataError);
}

TEST_CASE("element from id round-trips through canonicalize") {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Element e = Element::random(rng);
        CHECK(canonicalize(e.raw) == e.id);
    }
}
