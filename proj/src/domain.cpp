#include "bodega/domain.hpp"

#include <algorithm>
#include <fstream>

#include "bodega/crypto.hpp"

namespace bodega {

ElementId canonicalize(const RawKey& key) {
    if (key.empty()) throw InvalidInput("cannot canonicalize an empty key");
    ElementId id;
    if (key.size() == 16) {
        std::memcpy(id.bytes.data(), key.data(), 16);
    } else {
        id.bytes = digest128(reinterpret_cast<const std::uint8_t*>(key.data()), key.size());
    }
    return id;
}

KeyedSet::KeyedSet(std::vector<Element> elements) : elements_(std::move(elements)) {
    std::sort(elements_.begin(), elements_.end(),
              [](const Element& a, const Element& b) { return a.id < b.id; });
    elements_.erase(std::unique(elements_.begin(), elements_.end(),
                                [](const Element& a, const Element& b) { return a.id == b.id; }),
                    elements_.end());
}

KeyedSet KeyedSet::from_raw_keys(std::span<const RawKey> keys) {
    std::vector<Element> elems;
    elems.reserve(keys.size());
    for (const RawKey& k : keys) elems.push_back(Element::from_raw(k));
    return KeyedSet(std::move(elems));
}

KeyedSet KeyedSet::from_ids(std::span<const ElementId> ids) {
    std::vector<Element> elems;
    elems.reserve(ids.size());
    for (const ElementId& id : ids) elems.push_back(Element::from_id(id));
    return KeyedSet(std::move(elems));
}

KeyedSet KeyedSet::random(std::size_t n, Rng& rng) {
    std::vector<Element> elems;
    elems.reserve(n);
    while (elems.size() < n) {
        elems.push_back(Element::random(rng));
        if (elems.size() == n) {
            KeyedSet s(std::move(elems));
            if (s.size() == n) return s;
            elems = s.elements();  // collision; top up
        }
    }
    return KeyedSet(std::move(elems));
}

bool KeyedSet::contains(const ElementId& id) const {
    auto it = std::lower_bound(elements_.begin(), elements_.end(), id,
                               [](const Element& e, const ElementId& v) { return e.id < v; });
    return it != elements_.end() && it->id == id;
}

std::size_t TrainingDataset::positives() const {
    return static_cast<std::size_t>(
        std::count_if(examples.begin(), examples.end(), [](const auto& e) { return e.label; }));
}

std::size_t TrainingDataset::negatives() const { return examples.size() - positives(); }

TrainingDataset build_training_dataset(const KeyedSet& s,
                                       std::span<const RawKey> negatives_pool,
                                       std::uint64_t seed) {
    TrainingDataset t;
    t.examples.reserve(s.size() + negatives_pool.size());
    for (const Element& e : s.elements()) t.examples.push_back({e.raw, e.id, true});
    for (const RawKey& k : negatives_pool) {
        ElementId id = canonicalize(k);
        if (s.contains(id))
            throw InvalidInput("negatives pool entry canonicalizes into the stored set: " + k);
        t.examples.push_back({k, id, false});
    }
    Rng rng(derive_seed(seed, 0xda7a5e7));
    std::shuffle(t.examples.begin(), t.examples.end(), rng);
    return t;
}

bool validate_training_dataset(const TrainingDataset& t, const KeyedSet& s) {
    for (const LabeledExample& e : t.examples) {
        if (e.id != canonicalize(e.key)) return false;
        if (e.label != s.contains(e.id)) return false;
    }
    return true;
}

DatasetFile load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dataset file: " + path.string());
    DatasetFile out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++out.rejected_lines;
            continue;
        }
        auto comma = line.find(',');
        if (comma != 1 || (line[0] != '0' && line[0] != '1') || comma + 1 >= line.size()) {
            ++out.rejected_lines;
            continue;
        }
        RawKey key = line.substr(comma + 1);
        if (line[0] == '1')
            out.positives.push_back(std::move(key));
        else
            out.negatives.push_back(std::move(key));
    }
    return out;
}

}  // namespace bodega
