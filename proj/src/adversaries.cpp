#include "bodega/adversaries.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace bodega {

KeyedSet subsample_corpus(const std::vector<RawKey>& corpus, std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<Element> picked;
    picked.reserve(n);
    for (std::size_t idx : order) {
        picked.push_back(Element::from_raw(corpus[idx]));
        if (picked.size() == n) break;
    }
    return KeyedSet(std::move(picked));
}

namespace {

KeyedSet choose_from(const AdversaryParams& params, std::size_t n, Rng& rng) {
    if (params.corpus_positives && !params.corpus_positives->empty())
        return subsample_corpus(*params.corpus_positives, n, rng);
    return KeyedSet::random(n, rng);
}

Element fresh_random(Rng& rng) { return Element::random(rng); }

// --- random-guess ---

class RandomGuesser final : public Adversary {
  public:
    explicit RandomGuesser(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "random-guess"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

  private:
    AdversaryParams params_;
};

// --- mutation (opaque-box) ---

class MutationAttacker final : public Adversary {
  public:
    explicit MutationAttacker(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "mutation"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    void begin(AttackContext& ctx, Rng&) override {
        const auto& elems = ctx.stored_set().elements();
        std::size_t n_sources = std::min<std::size_t>(64, elems.size());
        if (n_sources == 0) return;
        std::size_t stride = elems.size() / n_sources;
        for (std::size_t i = 0; i < n_sources; ++i)
            sources_.push_back(elems[i * stride].raw);
        hits_.assign(n_sources, 0);
        probes_.assign(n_sources, 0);
    }

    RoundAction propose_round(AttackContext&, std::uint64_t round, std::uint64_t,
                              Rng& rng) override {
        if (sources_.empty()) return {};
        std::size_t src = round % sources_.size();
        Element x = Element::from_raw(mutate(sources_[src], rng));
        pending_[x.id] = src;
        return {true, x};
    }

    void observe(const Element& x, bool answer, bool adversarial) override {
        if (!adversarial) return;
        auto it = pending_.find(x.id);
        if (it == pending_.end()) return;
        ++probes_[it->second];
        hits_[it->second] += answer;
        pending_.erase(it);
    }

    Element guess(AttackContext&, Rng& rng) override {
        if (sources_.empty()) return fresh_random(rng);
        std::size_t best = 0;
        double best_rate = -1.0;
        for (std::size_t i = 0; i < sources_.size(); ++i) {
            double rate = probes_[i] ? static_cast<double>(hits_[i]) /
                                           static_cast<double>(probes_[i])
                                     : 0.0;
            if (rate > best_rate) {
                best_rate = rate;
                best = i;
            }
        }
        return Element::from_raw(mutate(sources_[best], rng));
    }

  private:
    RawKey mutate(const RawKey& src, Rng& rng) const {
        RawKey out = src;
        std::size_t total_bits = out.size() * 8;
        auto flips = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(params_.flip_fraction *
                                                     static_cast<double>(total_bits))));
        std::uniform_int_distribution<std::size_t> dist(0, total_bits - 1);
        for (std::size_t i = 0; i < flips; ++i) {
            std::size_t bit = dist(rng);
            out[bit / 8] = static_cast<char>(out[bit / 8] ^ (1u << (bit % 8)));
        }
        return out;
    }

    AdversaryParams params_;
    std::vector<RawKey> sources_;
    std::vector<std::uint64_t> hits_, probes_;
    std::unordered_map<ElementId, std::size_t, ElementIdHash> pending_;
};

// --- feature-edit (clear-box) ---

class FeatureEditAttacker final : public Adversary {
  public:
    explicit FeatureEditAttacker(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "feature-edit"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    void begin(AttackContext& ctx, Rng& rng) override {
        if (!ctx.representation()) return;
        ParsedSnapshot snap = parse_snapshot(*ctx.representation());
        if (!snap.scorer || !snap.tau) return;
        if (!params_.corpus_negatives || params_.corpus_negatives->empty()) return;
        const auto& benign = *params_.corpus_negatives;
        std::uniform_int_distribution<std::size_t> pick(0, benign.size() - 1);
        // Hill-climb feature edits against the leaked model until the score
        // clears the threshold; keep a couple of unqueried candidates.
        for (int trial = 0; trial < 64 && candidates_.size() < 4; ++trial) {
            RawKey url = benign[pick(rng)];
            double score = snap.scorer->score(url);
            for (int step = 0; step < 24 && score < *snap.tau; ++step) {
                RawKey edited = apply_edit(url, rng);
                double edited_score = snap.scorer->score(edited);
                if (edited_score > score) {
                    url = std::move(edited);
                    score = edited_score;
                }
            }
            if (score >= *snap.tau && !ctx.stored_set().contains(canonicalize(url)))
                candidates_.push_back(url);
        }
    }

    RoundAction propose_round(AttackContext&, std::uint64_t round, std::uint64_t,
                              Rng&) override {
        // Confirm all but the reserved guess candidate with live queries.
        if (round + 1 >= candidates_.size()) return {};
        return {true, Element::from_raw(candidates_[round + 1])};
    }

    Element guess(AttackContext&, Rng& rng) override {
        if (!candidates_.empty()) return Element::from_raw(candidates_.front());
        return fresh_random(rng);
    }

  private:
    static RawKey apply_edit(const RawKey& url, Rng& rng) {
        std::uniform_int_distribution<int> pick(0, 6);
        RawKey out = url;
        switch (pick(rng)) {
            case 0: {  // drop the s in https
                auto pos = out.find("https://");
                if (pos == 0) out.erase(4, 1);
                break;
            }
            case 1: out += "/l0gin-verify-92"; break;
            case 2: out += "?session=482910&auth=0&redir=1"; break;
            case 3: {  // swap host for a bare address
                auto scheme = out.find("://");
                if (scheme != RawKey::npos) {
                    auto host_start = scheme + 3;
                    auto host_end = out.find('/', host_start);
                    if (host_end == RawKey::npos) host_end = out.size();
                    out.replace(host_start, host_end - host_start, "203.0.113.7");
                }
                break;
            }
            case 4: out += "/aa-bb-cc-0011223344"; break;
            case 5: {
                auto dot = out.find('.');
                if (dot != RawKey::npos) out.insert(dot, "-99");
                break;
            }
            default: out += "/update/secure/account/818283"; break;
        }
        return out;
    }

    AdversaryParams params_;
    std::vector<RawKey> candidates_;
};

// --- poisoner ---

class PoisonerAdversary final : public Adversary {
  public:
    explicit PoisonerAdversary(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "poisoner"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    std::optional<TrainingDataset> training_set(const KeyedSet& s, Rng& rng) override {
        TrainingDataset t;
        for (const Element& e : s.elements()) t.examples.push_back({e.raw, e.id, true});
        std::size_t negatives = s.size();
        if (params_.corpus_negatives && !params_.corpus_negatives->empty()) {
            for (const RawKey& k : *params_.corpus_negatives) {
                ElementId id = canonicalize(k);
                if (!s.contains(id)) t.examples.push_back({k, id, false});
                if (t.negatives() >= negatives) break;
            }
        } else {
            while (t.negatives() < negatives) {
                Element e = Element::random(rng);
                if (!s.contains(e.id)) t.examples.push_back({e.raw, e.id, false});
            }
        }
        // Poison: members of a fabricated family labeled positive although
        // they are outside S, which is exactly what validation must catch.
        std::size_t poison = params_.poison_count ? params_.poison_count
                                                  : std::max<std::size_t>(8, s.size() / 10);
        for (std::size_t i = 0; i < poison; ++i) {
            RawKey url = family_url(i);
            ElementId id = canonicalize(url);
            if (!s.contains(id)) t.examples.push_back({url, id, true});
        }
        std::shuffle(t.examples.begin(), t.examples.end(), rng);
        return t;
    }

    Element guess(AttackContext& ctx, Rng& rng) override {
        std::uniform_int_distribution<std::uint64_t> idx(1u << 20, (1u << 21) - 1);
        for (int i = 0; i < 16; ++i) {
            Element e = Element::from_raw(family_url(idx(rng)));
            if (!ctx.stored_set().contains(e.id)) return e;
        }
        return fresh_random(rng);
    }

  private:
    static RawKey family_url(std::uint64_t i) {
        return "http://poison" + std::to_string(i) + ".attack-family.example/p-" +
               std::to_string(i * 7 + 13);
    }

    AdversaryParams params_;
};

// --- repeat-query ---

class RepeatQueryAttacker final : public Adversary {
  public:
    explicit RepeatQueryAttacker(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "repeat-query"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    void begin(AttackContext& ctx, Rng& rng) override {
        do {
            target_ = Element::random(rng);
        } while (ctx.stored_set().contains(target_.id));
    }

    RoundAction propose_round(AttackContext&, std::uint64_t, std::uint64_t, Rng&) override {
        return {true, target_};
    }

    Element guess(AttackContext&, Rng& rng) override { return fresh_random(rng); }

  private:
    AdversaryParams params_;
    Element target_;
};

// --- key-extractor ---

class KeyExtractor final : public Adversary {
  public:
    explicit KeyExtractor(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "key-extractor"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    void begin(AttackContext& ctx, Rng& rng) override {
        if (!ctx.representation()) return;
        ParsedSnapshot snap = parse_snapshot(*ctx.representation());
        if (!snap.leaked_key || !snap.inner_bloom) return;
        // With (M, sk) in hand the query path can be evaluated offline; no
        // scored queries are spent at all.
        Prp prp(SecretKey::from_bytes(*snap.leaked_key));
        for (std::uint64_t i = 0; i < params_.search_cap; ++i) {
            Element e = Element::random(rng);
            if (ctx.stored_set().contains(e.id)) continue;
            if (snap.inner_bloom->query_id(prp.apply(e.id))) {
                found_ = e;
                return;
            }
        }
    }

    Element guess(AttackContext&, Rng& rng) override {
        return found_ ? *found_ : fresh_random(rng);
    }

  private:
    AdversaryParams params_;
    std::optional<Element> found_;
};

// --- state-reader bettor ---

class StateReaderBettor final : public Adversary {
  public:
    explicit StateReaderBettor(const AdversaryParams& params) : params_(params) {}
    std::string_view name() const override { return "state-reader"; }

    KeyedSet choose_set(std::size_t n, Rng& rng) override {
        return choose_from(params_, n, rng);
    }

    void begin(AttackContext& ctx, Rng&) override {
        if (!ctx.representation()) return;
        ParsedSnapshot snap = parse_snapshot(*ctx.representation());
        coin_ = snap.coin;
    }

    std::pair<bool, Element> bet(AttackContext&, Rng& rng) override {
        Element e = fresh_random(rng);
        return {coin_.value_or(false), e};
    }

  private:
    AdversaryParams params_;
    std::optional<bool> coin_;
};

}  // namespace

const std::vector<AdversaryInfo>& builtin_adversaries() {
    static const std::vector<AdversaryInfo> catalog = {
        {"random-guess", "no queries, uniform fresh guess, always bets",
         [](const AdversaryParams& p) { return std::make_unique<RandomGuesser>(p); }},
        {"mutation", "flips a fraction of input bits of known positives (opaque box)",
         [](const AdversaryParams& p) { return std::make_unique<MutationAttacker>(p); }},
        {"feature-edit", "edits benign URL features against the leaked model (clear box)",
         [](const AdversaryParams& p) { return std::make_unique<FeatureEditAttacker>(p); }},
        {"poisoner", "supplies a training dataset with mislabeled family members",
         [](const AdversaryParams& p) { return std::make_unique<PoisonerAdversary>(p); }},
        {"repeat-query", "spends the whole budget on one repeated query",
         [](const AdversaryParams& p) { return std::make_unique<RepeatQueryAttacker>(p); }},
        {"key-extractor", "reads a leaked PRP key and searches offline for a false positive",
         [](const AdversaryParams& p) { return std::make_unique<KeyExtractor>(p); }},
        {"state-reader", "reads the always-one coin and bets only on heads",
         [](const AdversaryParams& p) { return std::make_unique<StateReaderBettor>(p); }},
    };
    return catalog;
}

std::unique_ptr<Adversary> make_adversary(std::string_view name, const AdversaryParams& params) {
    for (const AdversaryInfo& info : builtin_adversaries())
        if (info.name == name) return info.make(params);
    std::string known;
    for (const AdversaryInfo& info : builtin_adversaries()) {
        if (!known.empty()) known += ", ";
        known += info.name;
    }
    throw ConfigError("unknown adversary '" + std::string(name) + "'; catalog: " + known);
}

std::function<std::unique_ptr<Adversary>()> adversary_factory(std::string_view name,
                                                              const AdversaryParams& params) {
    std::string owned(name);
    return [owned, params]() { return make_adversary(owned, params); };
}

}  // namespace bodega
