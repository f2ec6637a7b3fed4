#include <doctest.h>

#include <cmath>

#include "bodega/analytic.hpp"
#include "bodega/learned.hpp"
#include "bodega/urlgen.hpp"

using namespace bodega;

namespace {

constexpr auto F = [](UrlFeature f) { return static_cast<std::size_t>(f); };

/// Constant-score scorer for threshold corner cases.
class ConstScorer final : public Scorer {
  public:
    explicit ConstScorer(double v) : v_(v) {}
    double score(const RawKey&) const override { return v_; }
    std::size_t size_bytes() const override { return 8; }
    Bytes serialize() const override { return {}; }
    std::string_view name() const override { return "const"; }

  private:
    double v_;
};

}  // namespace

TEST_CASE("feature schema has twelve entries with hand-counted values") {
    FeatureVector f = extract_features("http://example.com");
    CHECK(f.size() == 12);
    CHECK(f[F(UrlFeature::Length)] == 18.0);
    CHECK(f[F(UrlFeature::DigitCount)] == 0.0);
    CHECK(f[F(UrlFeature::DotCount)] == 1.0);
    CHECK(f[F(UrlFeature::Https)] == 0.0);
    CHECK(f[F(UrlFeature::HostLength)] == 11.0);
    CHECK(f[F(UrlFeature::PathDepth)] == 0.0);
}

TEST_CASE("path depth counts appended segments") {
    FeatureVector base = extract_features("http://example.com");
    FeatureVector deeper = extract_features("http://example.com/a/b");
    CHECK(deeper[F(UrlFeature::PathDepth)] - base[F(UrlFeature::PathDepth)] == 2.0);
}

TEST_CASE("feature flags fire on their patterns") {
    CHECK(extract_features("http://192.168.0.1/x")[F(UrlFeature::ContainsIp)] == 1.0);
    CHECK(extract_features("http://example.com/x")[F(UrlFeature::ContainsIp)] == 0.0);
    CHECK(extract_features("http://bit.ly/abc")[F(UrlFeature::Shortener)] == 1.0);
    CHECK(extract_features("https://example.com")[F(UrlFeature::Https)] == 1.0);
    CHECK(extract_features("https://a.b.c/q?x=1&y=2")[F(UrlFeature::QueryParams)] == 2.0);
}

TEST_CASE("features stay defined on arbitrary bytes") {
    RawKey junk;
    for (int i = 0; i < 64; ++i) junk += static_cast<char>(i * 37 % 251);
    FeatureVector f = extract_features(junk);
    for (double v : f) CHECK(std::isfinite(v));
    CHECK(f[F(UrlFeature::Length)] == 64.0);
}

TEST_CASE("trivial scorer is all-negative with constant size") {
    TrivialScorer s;
    CHECK(s.score("anything") == 0.0);
    CHECK(s.size_bytes() == 8);
}

TEST_CASE("training a separable toy set reaches high accuracy") {
    // positives: long digit-heavy; negatives: short clean
    TrainingDataset t;
    Rng rng(1);
    for (int i = 0; i < 300; ++i) {
        RawKey pos = "http://h" + std::to_string(100000 + i) +
                     ".zz/1234567890/1234567890/1234567890";
        t.examples.push_back({pos, canonicalize(pos), true});
        RawKey neg = "https://site" + std::string(1, static_cast<char>('a' + i % 26)) + ".org";
        if (i < 26) t.examples.push_back({neg, canonicalize(neg), false});
    }
    ScorerPtr s = train_scorer(t, 4096, 7);
    int correct = 0;
    for (const LabeledExample& e : t.examples)
        correct += (s->score(e.key) >= 0.5) == e.label;
    double accuracy = static_cast<double>(correct) / static_cast<double>(t.examples.size());
    CHECK(accuracy >= 0.95);
}

TEST_CASE("scorer budget below the model footprint is refused") {
    TrainingDataset t;
    RawKey k = "http://x.example/a";
    t.examples.push_back({k, canonicalize(k), true});
    try {
        train_scorer(t, 16, 1);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(std::to_string(min_scorer_bytes())) !=
              std::string::npos);
    }
}

TEST_CASE("trained scorer fits its budget and scores deterministically") {
    UrlCorpus corpus = generate_url_corpus({400, 800, 9});
    KeyedSet s = KeyedSet::from_raw_keys(corpus.malicious);
    TrainingDataset t = build_training_dataset(s, corpus.benign, 2);
    ScorerPtr scorer = train_scorer(t, 1024, 3);
    CHECK(scorer->size_bytes() <= 1024);

    double first = scorer->score(corpus.malicious[0]);
    for (int i = 0; i < 1000; ++i) CHECK(scorer->score(corpus.malicious[0]) == first);
    CHECK(first >= 0.0);
    CHECK(first <= 1.0);
}

TEST_CASE("scorer blob round-trips") {
    UrlCorpus corpus = generate_url_corpus({200, 300, 5});
    KeyedSet s = KeyedSet::from_raw_keys(corpus.malicious);
    TrainingDataset t = build_training_dataset(s, corpus.benign, 4);
    ScorerPtr a = train_scorer(t, 1024, 5);
    ScorerPtr b = deserialize_scorer(a->serialize());
    for (int i = 0; i < 50; ++i) {
        CHECK(a->score(corpus.benign[i]) == b->score(corpus.benign[i]));
    }
}

TEST_CASE("url scorer is a weak learner at worst on held-out data") {
    UrlCorpus corpus = generate_url_corpus({3000, 6000, 11});
    std::vector<RawKey> train_pos(corpus.malicious.begin(), corpus.malicious.begin() + 2000);
    std::vector<RawKey> train_neg(corpus.benign.begin(), corpus.benign.begin() + 4000);
    KeyedSet s = KeyedSet::from_raw_keys(train_pos);
    TrainingDataset t = build_training_dataset(s, train_neg, 6);
    ScorerPtr scorer = train_scorer(t, 1024, 7);

    KeyedSet held_pos = KeyedSet::from_raw_keys(
        std::span(corpus.malicious).subspan(2000));
    std::vector<RawKey> held_neg(corpus.benign.begin() + 4000, corpus.benign.end());
    ModelSoundness sound = estimate_soundness(*scorer, 0.5, held_pos, held_neg);
    CHECK(sound.eps_p < 0.5);
    CHECK(sound.eps_n < 0.5);
}

TEST_CASE("quantile threshold on a constant scorer returns the constant") {
    Rng rng(3);
    KeyedSet s = KeyedSet::random(100, rng);
    ConstScorer half(0.5);
    double tau = select_threshold(half, s, {ThresholdPolicy::Kind::Quantile, 0.5});
    CHECK(tau == 0.5);
}

TEST_CASE("trivial scorer with any positive threshold routes everything down") {
    Rng rng(4);
    KeyedSet s = KeyedSet::random(50, rng);
    TrivialScorer trivial;
    double tau = 0.5;
    for (const Element& e : s.elements()) CHECK(trivial.score(e.raw) < tau);
}

TEST_CASE("fpr-minimizing threshold never loses to the median quantile") {
    UrlCorpus corpus = generate_url_corpus({1500, 3000, 13});
    KeyedSet s = KeyedSet::from_raw_keys(corpus.malicious);
    TrainingDataset t = build_training_dataset(s, corpus.benign, 8);
    ScorerPtr scorer = train_scorer(t, 1024, 9);

    ThresholdBudget budget;
    budget.backup_bytes_total = 4096;
    budget.negatives = corpus.benign;

    double tau_min =
        select_threshold(*scorer, s, {ThresholdPolicy::Kind::FprMinimizing, 0.5}, &budget);
    double tau_med = select_threshold(*scorer, s, {ThresholdPolicy::Kind::Quantile, 0.5});

    auto modeled = [&](double tau) {
        std::uint64_t n_a = 0;
        for (const Element& e : s.elements()) n_a += scorer->score(e.raw) >= tau;
        std::uint64_t n_b = s.size() - n_a;
        std::uint64_t fp = 0;
        for (const RawKey& k : corpus.benign) fp += scorer->score(k) >= tau;
        double fp_l = static_cast<double>(fp) / static_cast<double>(corpus.benign.size());
        return lbf_fpr_composed(fp_l, cbf_fpr(8 * 2048, n_a), 1.0 - fp_l,
                                cbf_fpr(8 * 2048, n_b));
    };
    CHECK(modeled(tau_min) <= modeled(tau_med));
}

TEST_CASE("soundness estimates cover the degenerate scorers") {
    Rng rng(6);
    KeyedSet s = KeyedSet::random(200, rng);
    std::vector<RawKey> negatives;
    for (int i = 0; i < 100; ++i) {
        Element e = Element::random(rng);
        if (!s.contains(e.id)) negatives.push_back(e.raw);
    }

    TrivialScorer trivial;
    ModelSoundness low = estimate_soundness(trivial, 0.5, s, negatives);
    CHECK(low.eps_p == 0.0);
    CHECK(low.eps_n == 1.0);

    ConstScorer ones(1.0);
    ModelSoundness high = estimate_soundness(ones, 0.5, s, negatives);
    CHECK(high.eps_p == 1.0);
    CHECK(high.eps_n == 0.0);

    CHECK_THROWS_AS(estimate_soundness(trivial, 0.5, s, {}), InvalidInput);
}

TEST_CASE("wilson interval brackets the point estimate") {
    WilsonInterval ci = wilson_interval(10, 1000);
    CHECK(ci.lo < 0.01);
    CHECK(ci.hi > 0.01);
    CHECK(ci.lo >= 0.0);
    CHECK(ci.hi <= 1.0);
}
