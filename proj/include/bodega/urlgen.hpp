#pragma once

#include <iosfwd>

#include "bodega/domain.hpp"

namespace bodega {

/// Deterministic synthetic URL corpus in the malicious/benign dataset shape.
/// Malicious URLs skew toward bare-address hosts, shorteners, deep digit-
/// heavy paths and query blobs; benign URLs toward short https word-hosts.
/// A slice of each class is drawn from the other style so a trained model
/// has realistic, nonzero error rates.
struct UrlCorpusConfig {
    std::size_t malicious = 1000;
    std::size_t benign = 2000;
    std::uint64_t seed = 1;
};

struct UrlCorpus {
    std::vector<RawKey> malicious;
    std::vector<RawKey> benign;
};

UrlCorpus generate_url_corpus(const UrlCorpusConfig& config);

/// Writes `label,key` lines (label 1 = malicious).
void write_dataset(std::ostream& out, const UrlCorpus& corpus);

}  // namespace bodega
