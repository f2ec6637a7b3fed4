#pragma once

#include "bodega/games.hpp"

namespace bodega {

struct AdversaryParams {
    double flip_fraction = 0.1;          // mutation: fraction of input bits flipped
    std::uint64_t repeat_threshold = 0;  // repeat-query: 0 means the game budget
    std::uint64_t search_cap = 200000;   // key-extractor offline candidate cap
    std::size_t poison_count = 0;        // poisoner: 0 means |S| / 10
    std::shared_ptr<const std::vector<RawKey>> corpus_positives;
    std::shared_ptr<const std::vector<RawKey>> corpus_negatives;
};

struct AdversaryInfo {
    std::string name;
    std::string summary;
    std::function<std::unique_ptr<Adversary>(const AdversaryParams&)> make;
};

const std::vector<AdversaryInfo>& builtin_adversaries();

/// Throws ConfigError listing the catalog when the name is unknown.
std::unique_ptr<Adversary> make_adversary(std::string_view name, const AdversaryParams& params);

std::function<std::unique_ptr<Adversary>()> adversary_factory(std::string_view name,
                                                              const AdversaryParams& params);

/// Deterministic subsample of a raw-key corpus as a stored set.
KeyedSet subsample_corpus(const std::vector<RawKey>& corpus, std::size_t n, Rng& rng);

}  // namespace bodega
