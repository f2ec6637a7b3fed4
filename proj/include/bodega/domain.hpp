#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bodega/common.hpp"

namespace bodega {

/// Arbitrary-length byte string ingested from a dataset (e.g. a URL).
using RawKey = std::string;

/// Maps a raw key onto the canonical 128-bit domain. Keys of exactly 16
/// bytes embed verbatim (injective); other lengths go through a fixed
/// collision-resistant 128-bit digest.
ElementId canonicalize(const RawKey& key);

/// A domain element together with the raw key it came from. Elements made
/// from a bare id carry their own 16 bytes as the raw key, so
/// canonicalize(raw) == id holds for every Element.
struct Element {
    ElementId id;
    RawKey raw;

    static Element from_raw(RawKey key) {
        ElementId id = canonicalize(key);
        return {id, std::move(key)};
    }
    static Element from_id(const ElementId& id) {
        return {id, RawKey(reinterpret_cast<const char*>(id.bytes.data()), 16)};
    }
    static Element random(Rng& rng) { return from_id(ElementId::random(rng)); }
};

/// Immutable deduplicated key set, ordered by id.
class KeyedSet {
  public:
    KeyedSet() = default;
    explicit KeyedSet(std::vector<Element> elements);

    static KeyedSet from_raw_keys(std::span<const RawKey> keys);
    static KeyedSet from_ids(std::span<const ElementId> ids);
    static KeyedSet random(std::size_t n, Rng& rng);

    bool contains(const ElementId& id) const;
    std::size_t size() const { return elements_.size(); }
    const std::vector<Element>& elements() const { return elements_; }

  private:
    std::vector<Element> elements_;  // sorted by id
};

struct LabeledExample {
    RawKey key;
    ElementId id;
    bool label;  // true iff member of the associated set
};

struct TrainingDataset {
    std::vector<LabeledExample> examples;

    std::size_t positives() const;
    std::size_t negatives() const;
};

/// Builds a training dataset from the stored set plus a caller-supplied
/// negatives pool. Every pool element must canonicalize outside S.
TrainingDataset build_training_dataset(const KeyedSet& s,
                                       std::span<const RawKey> negatives_pool,
                                       std::uint64_t seed);

/// Pure predicate: label-1 ids are members, label-0 ids are not.
bool validate_training_dataset(const TrainingDataset& t, const KeyedSet& s);

/// Parsed `label,key` dataset file. Lines that fail to parse are counted
/// and skipped, never fatal.
struct DatasetFile {
    std::vector<RawKey> positives;
    std::vector<RawKey> negatives;
    std::size_t rejected_lines = 0;
};

DatasetFile load_dataset(const std::filesystem::path& path);

}  // namespace bodega
