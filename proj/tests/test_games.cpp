#include <doctest.h>

#include <cmath>
#include <regex>
#include <sstream>
#include <unordered_set>

#include "bodega/adversaries.hpp"
#include "bodega/analytic.hpp"
#include "bodega/urlgen.hpp"

using namespace bodega;

namespace {

ChallengerConfig plain_challenger(FilterKind kind, std::uint64_t bytes) {
    ChallengerConfig cfg;
    cfg.build.kind = kind;
    cfg.build.total_bytes = bytes;
    return cfg;
}

/// Spends more queries than the budget allows, all distinct.
class GreedyProber final : public Adversary {
  public:
    std::string_view name() const override { return "greedy-prober"; }
    RoundAction propose_round(AttackContext&, std::uint64_t, std::uint64_t,
                              Rng& rng) override {
        return {true, Element::random(rng)};
    }
    void begin(AttackContext& ctx, Rng& rng) override {
        // burn extra direct oracle calls beyond the round protocol
        for (int i = 0; i < 64; ++i) ctx.query(Element::random(rng));
    }
};

/// Always passes in the bet-or-pass game.
class AlwaysPass final : public Adversary {
  public:
    std::string_view name() const override { return "always-pass"; }
    std::pair<bool, Element> bet(AttackContext&, Rng& rng) override {
        return {false, Element::random(rng)};
    }
};

std::string log_string(const GameRunResult& result) {
    std::ostringstream out;
    write_transcript_log(out, result);
    return out.str();
}

}  // namespace

TEST_CASE("query budget is enforced across direct and round queries") {
    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 200;
    config.t = 50;
    config.repetitions = 3;
    config.seed = 7;
    GameRunResult result =
        run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 1024), config),
                 [] { return std::make_unique<GreedyProber>(); });
    for (const GameTranscript& tr : result.transcripts)
        CHECK(tr.queries.size() == 50);
}

TEST_CASE("lpa caps adversarial rounds at the alpha fraction") {
    GameConfig config;
    config.game = GameKind::Lpa;
    config.set_size = 100;
    config.t = 100;
    config.alpha = 0.3;
    config.repetitions = 5;
    config.seed = 11;
    GameRunResult result =
        run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 1024), config),
                 adversary_factory("repeat-query", {}));
    for (const GameTranscript& tr : result.transcripts) {
        std::uint64_t adversarial = 0;
        for (const QueryRecord& q : tr.queries) adversarial += q.adversarial;
        CHECK(adversarial == 30);
        CHECK(tr.queries.size() == 100);
        CHECK(tr.refused_rounds == 70);
    }
}

TEST_CASE("winning guesses are always fresh") {
    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 100;
    config.t = 20;
    config.repetitions = 50;
    config.seed = 13;
    ChallengerConfig cfg = plain_challenger(FilterKind::Classic, 512);
    cfg.wrap = ChallengerConfig::Wrap::CoinAlwaysOne;
    cfg.coin_p = 0.5;  // plenty of forced wins
    GameRunResult result = run_game(config, make_challenger(cfg, config),
                                    adversary_factory("random-guess", {}));
    CHECK(result.wins() > 0);
    for (const GameTranscript& tr : result.transcripts) {
        if (tr.outcome != Outcome::Win) continue;
        REQUIRE(tr.guess.has_value());
        for (const QueryRecord& q : tr.queries) CHECK(q.x != *tr.guess);
    }
}

TEST_CASE("profit takes only the three scoring values") {
    GameConfig config;
    config.game = GameKind::Lbp;
    config.set_size = 100;
    config.t = 10;
    config.epsilon = 0.2;
    config.repetitions = 200;
    config.seed = 17;
    ChallengerConfig cfg = plain_challenger(FilterKind::Ny, 1024);
    cfg.wrap = ChallengerConfig::Wrap::CoinAlwaysOne;
    cfg.coin_p = 0.3;
    GameRunResult result = run_game(config, make_challenger(cfg, config),
                                    adversary_factory("state-reader", {}));
    for (const GameTranscript& tr : result.transcripts) {
        bool ok = tr.profit == 0.0 || tr.profit == 1.0 / 0.2 ||
                  tr.profit == -1.0 / (1.0 - 0.2);
        CHECK(ok);
    }
}

TEST_CASE("identical seeds give byte-identical transcript logs") {
    GameConfig config;
    config.game = GameKind::Lpa;
    config.set_size = 300;
    config.t = 64;
    config.alpha = 0.5;
    config.repetitions = 10;
    config.seed = 99;
    AdversaryParams params;
    auto factory = make_challenger(plain_challenger(FilterKind::Ny, 2048), config);
    GameRunResult a = run_game(config, factory, adversary_factory("mutation", params));
    GameRunResult b = run_game(config, factory, adversary_factory("mutation", params));
    CHECK(log_string(a) == log_string(b));

    config.seed = 100;
    GameRunResult c = run_game(config, factory, adversary_factory("mutation", params));
    CHECK(log_string(a) != log_string(c));
}

TEST_CASE("lpa with alpha one replays the lfa transcript exactly") {
    GameConfig lpa;
    lpa.game = GameKind::Lpa;
    lpa.set_size = 150;
    lpa.t = 40;
    lpa.alpha = 1.0;
    lpa.repetitions = 6;
    lpa.seed = 23;
    GameConfig lfa = lpa;
    lfa.game = GameKind::Lfa;

    auto factory = make_challenger(plain_challenger(FilterKind::Classic, 1024), lpa);
    GameRunResult a = run_game(lpa, factory, adversary_factory("repeat-query", {}));
    GameRunResult b = run_game(lfa, factory, adversary_factory("repeat-query", {}));
    CHECK(log_string(a) == log_string(b));
}

TEST_CASE("transcript log lines match the documented format") {
    GameConfig config;
    config.game = GameKind::Lab;
    config.set_size = 50;
    config.t = 5;
    config.repetitions = 2;
    config.seed = 31;
    GameRunResult result =
        run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 512), config),
                 adversary_factory("repeat-query", {}));
    std::istringstream in(log_string(result));
    std::string line;
    std::regex record(R"(^\d+,\d+,[01],[0-9a-f]{32},[01]$)");
    std::regex trailer(R"(^\d+,(win|lose|pass),-?[0-9.e+-]+$)");
    int records = 0, trailers = 0;
    while (std::getline(in, line)) {
        if (std::regex_match(line, record)) ++records;
        else if (std::regex_match(line, trailer)) ++trailers;
        else FAIL("unexpected log line: ", line);
    }
    CHECK(records == 10);
    CHECK(trailers == 2);
}

TEST_CASE("random guessing against a classic filter wins at the formula rate") {
    GameConfig config;
    config.game = GameKind::Lab;
    config.set_size = 500;
    config.t = 0;
    config.repetitions = 10000;
    config.seed = 37;
    GameRunResult result =
        run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 512), config),
                 adversary_factory("random-guess", {}));
    double expected = cbf_fpr(512 * 8, 500);
    double sigma = std::sqrt(expected * (1 - expected) / 10000.0);
    CHECK(std::abs(result.win_rate() - expected) <= 3 * sigma);
}

TEST_CASE("passing always scores exactly zero") {
    GameConfig config;
    config.game = GameKind::Lbp;
    config.set_size = 100;
    config.t = 4;
    config.epsilon = 0.3;
    config.repetitions = 50;
    config.seed = 41;
    GameRunResult result =
        run_game(config, make_challenger(plain_challenger(FilterKind::Ny, 1024), config),
                 [] { return std::make_unique<AlwaysPass>(); });
    ProfitEstimate est = estimate_profit(result.transcripts);
    CHECK(est.mean == 0.0);
    for (const GameTranscript& tr : result.transcripts) {
        CHECK(tr.outcome == Outcome::Pass);
        CHECK(tr.profit == 0.0);
    }
    CHECK_THROWS_AS(estimate_profit({}), InvalidInput);
}

TEST_CASE("state reader earns p over epsilon against the coin gadget") {
    GameConfig config;
    config.game = GameKind::Lbp;
    config.set_size = 200;
    config.t = 0;
    config.epsilon = 0.5;
    config.repetitions = 500;
    config.seed = 43;
    ChallengerConfig cfg = plain_challenger(FilterKind::Ny, 1024);
    cfg.wrap = ChallengerConfig::Wrap::CoinAlwaysOne;
    cfg.coin_p = 0.2;
    GameRunResult result = run_game(config, make_challenger(cfg, config),
                                    adversary_factory("state-reader", {}));
    ProfitEstimate est = estimate_profit(result.transcripts);
    // E = p / epsilon = 0.4; sigma^2 = p (1/eps)^2 - E^2 = 0.64
    double sigma = std::sqrt(0.64 / 500.0);
    CHECK(std::abs(est.mean - 0.4) <= 3 * sigma);
}

TEST_CASE("repeat trigger falls to repetition in lfa but not lpa") {
    GameConfig lfa;
    lfa.game = GameKind::Lfa;
    lfa.set_size = 200;
    lfa.t = 25;
    lfa.repetitions = 20;
    lfa.seed = 47;
    ChallengerConfig cfg = plain_challenger(FilterKind::Classic, 2048);
    cfg.wrap = ChallengerConfig::Wrap::RepeatTrigger;
    GameRunResult strong = run_game(lfa, make_challenger(cfg, lfa),
                                    adversary_factory("repeat-query", {}));
    CHECK(strong.win_rate() == 1.0);

    GameConfig lpa = lfa;
    lpa.game = GameKind::Lpa;
    lpa.alpha = 0.5;
    GameRunResult weak = run_game(lpa, make_challenger(cfg, lpa),
                                  adversary_factory("repeat-query", {}));
    CHECK(weak.win_rate() <= 0.1);
}

TEST_CASE("key extractor owns the leaking filter and nothing else") {
    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 300;
    config.t = 0;
    config.repetitions = 20;
    config.seed = 53;
    AdversaryParams params;
    params.search_cap = 200000;

    // ~10 bits per element after the key: inner fpr near one percent, well
    // inside the offline search budget
    ChallengerConfig leak = plain_challenger(FilterKind::Ny, 400);
    leak.wrap = ChallengerConfig::Wrap::KeyLeak;
    GameRunResult owned = run_game(config, make_challenger(leak, config),
                                   adversary_factory("key-extractor", params));
    CHECK(owned.win_rate() == 1.0);

    ChallengerConfig proper = plain_challenger(FilterKind::Ny, 400);
    GameRunResult blocked = run_game(config, make_challenger(proper, config),
                                     adversary_factory("key-extractor", params));
    CHECK(blocked.win_rate() <= 0.2);
}

TEST_CASE("the representation oracle is withheld from lab and lpa") {
    UrlCorpus corpus = generate_url_corpus({300, 600, 59});
    auto positives = std::make_shared<std::vector<RawKey>>(corpus.malicious);
    auto negatives = std::make_shared<std::vector<RawKey>>(corpus.benign);
    AdversaryParams params;
    params.corpus_positives = positives;
    params.corpus_negatives = negatives;

    ChallengerConfig cfg = plain_challenger(FilterKind::Standard, 8192);
    cfg.build.model_budget_bytes = 2048;
    cfg.build.threshold = {ThresholdPolicy::Kind::Quantile, 0.1};
    cfg.negatives_pool = negatives;

    GameConfig lab;
    lab.game = GameKind::Lab;
    lab.set_size = 300;
    lab.t = 30;
    lab.repetitions = 10;
    lab.seed = 61;
    // feature-edit needs the leaked model; without the representation it
    // degenerates to random guessing
    GameRunResult without = run_game(lab, make_challenger(cfg, lab),
                                     adversary_factory("feature-edit", params));
    CHECK(without.win_rate() <= 0.2);

    GameConfig lfa = lab;
    lfa.game = GameKind::Lfa;
    GameRunResult with = run_game(lfa, make_challenger(cfg, lfa),
                                  adversary_factory("feature-edit", params));
    CHECK(with.win_rate() >= 0.8);
}

TEST_CASE("poisoned datasets are rejected when validation is on") {
    UrlCorpus corpus = generate_url_corpus({400, 800, 67});
    auto positives = std::make_shared<std::vector<RawKey>>(corpus.malicious);
    auto negatives = std::make_shared<std::vector<RawKey>>(corpus.benign);
    AdversaryParams params;
    params.corpus_positives = positives;
    params.corpus_negatives = negatives;

    ChallengerConfig cfg = plain_challenger(FilterKind::Standard, 8192);
    cfg.build.model_budget_bytes = 2048;
    cfg.build.threshold = {ThresholdPolicy::Kind::Quantile, 0.1};
    cfg.negatives_pool = negatives;

    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 400;
    config.t = 10;
    config.repetitions = 10;
    config.seed = 71;

    GameRunResult guarded = run_game(config, make_challenger(cfg, config),
                                     adversary_factory("poisoner", params));
    CHECK(guarded.trainset_rejections == 10);
    CHECK(guarded.win_rate() <= 0.2);

    config.validate_training = false;
    GameRunResult relaxed = run_game(config, make_challenger(cfg, config),
                                     adversary_factory("poisoner", params));
    CHECK(relaxed.trainset_rejections == 0);
    CHECK(relaxed.win_rate() >= 0.8);
}

TEST_CASE("unknown adversary names list the catalog") {
    try {
        make_adversary("nonesuch", {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        for (const AdversaryInfo& info : builtin_adversaries())
            CHECK(msg.find(info.name) != std::string::npos);
    }
}

TEST_CASE("catalog covers the documented strategies") {
    std::vector<std::string> expected = {"random-guess", "mutation",      "feature-edit",
                                         "poisoner",     "repeat-query",  "key-extractor",
                                         "state-reader"};
    CHECK(builtin_adversaries().size() == expected.size());
    for (const std::string& name : expected) CHECK_NOTHROW(make_adversary(name, {}));
}

namespace {

/// Exercises the construction-side oracles and counts accepted calls.
class OracleHammer final : public Adversary {
  public:
    std::string_view name() const override { return "oracle-hammer"; }
    void begin(AttackContext& ctx, Rng& rng) override {
        KeyedSet probe = KeyedSet::random(16, rng);
        for (int i = 0; i < 40; ++i) {
            auto repr = ctx.build_representation(probe);
            if (repr) {
                ++accepted;
                first_repr_size = repr->size();
            }
        }
        auto t = ctx.make_training_set(probe);
        if (t) {
            trainset_ok = validate_training_dataset(*t, probe);
            auto model = ctx.train_model(*t);
            model_ok = model.has_value() && model->first != nullptr;
        }
    }
    int accepted = 0;
    std::size_t first_repr_size = 0;
    bool trainset_ok = false;
    bool model_ok = false;
};

}  // namespace

TEST_CASE("construction oracles answer in lfa and respect the call cap") {
    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 64;
    config.t = 4;
    config.repetitions = 1;
    config.seed = 73;
    config.oracle_call_cap = 10;

    auto hammer = std::make_shared<OracleHammer>();
    // single handle observed across the run (one repetition)
    auto factory = [hammer]() {
        struct Proxy final : Adversary {
            std::shared_ptr<OracleHammer> inner;
            explicit Proxy(std::shared_ptr<OracleHammer> h) : inner(std::move(h)) {}
            std::string_view name() const override { return inner->name(); }
            void begin(AttackContext& ctx, Rng& rng) override { inner->begin(ctx, rng); }
        };
        return std::make_unique<Proxy>(hammer);
    };
    run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 512), config),
             factory);
    CHECK(hammer->accepted == 10);  // capped, further calls refused
    CHECK(hammer->first_repr_size > 0);
}

TEST_CASE("construction oracles answer fully under a roomy cap") {
    GameConfig config;
    config.game = GameKind::Lfa;
    config.set_size = 64;
    config.t = 4;
    config.repetitions = 1;
    config.seed = 79;

    auto hammer = std::make_shared<OracleHammer>();
    auto factory = [hammer]() {
        struct Proxy final : Adversary {
            std::shared_ptr<OracleHammer> inner;
            explicit Proxy(std::shared_ptr<OracleHammer> h) : inner(std::move(h)) {}
            std::string_view name() const override { return inner->name(); }
            void begin(AttackContext& ctx, Rng& rng) override { inner->begin(ctx, rng); }
        };
        return std::make_unique<Proxy>(hammer);
    };
    run_game(config, make_challenger(plain_challenger(FilterKind::Classic, 512), config),
             factory);
    CHECK(hammer->accepted == 40);
    CHECK(hammer->trainset_ok);
    CHECK(hammer->model_ok);
}

TEST_CASE("snapshot parsing rejects malformed bytes") {
    CHECK_THROWS_AS(parse_snapshot({}), DataError);

    Bytes garbage = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    CHECK_THROWS_AS(parse_snapshot(garbage), DataError);

    // valid header, truncated payload
    Rng rng(83);
    KeyedSet s = KeyedSet::random(50, rng);
    NyCbf ny = NyCbf::build(s, {512, 3, 50}, keygen(128, 5), 6);
    Bytes blob = KeyLeakFilter(std::move(ny)).serialize();
    Bytes cut(blob.begin(), blob.begin() + 20);
    CHECK_THROWS_AS(parse_snapshot(cut), DataError);

    ParsedSnapshot ok = parse_snapshot(blob);
    CHECK(ok.kind == wire::Kind::KeyLeak);
    CHECK(ok.leaked_key.has_value());
    CHECK(ok.inner_bloom.has_value());
}

TEST_CASE("lbf snapshots expose the scorer and threshold to parse_snapshot") {
    UrlCorpus corpus = generate_url_corpus({200, 400, 89});
    KeyedSet s = KeyedSet::from_raw_keys(corpus.malicious);
    TrainingDataset t = build_training_dataset(s, corpus.benign, 1);
    LbfBuildConfig config;
    config.kind = FilterKind::Standard;
    config.budget.total_bytes = 8192;
    config.budget.model_budget_bytes = 2048;
    FilterSnapshot snap = lbf_build(config, s, t, 3);

    ParsedSnapshot parsed = parse_snapshot(snap.serialize());
    CHECK(parsed.kind == wire::Kind::StandardLbf);
    REQUIRE(parsed.scorer != nullptr);
    REQUIRE(parsed.tau.has_value());
    CHECK(*parsed.tau == snap.meta.tau);
    // the leaked model is the real one: identical scores
    for (int i = 0; i < 20; ++i)
        CHECK(parsed.scorer->score(corpus.benign[i]) ==
              snap.scorer->score(corpus.benign[i]));
}

TEST_CASE("game config validation") {
    GameConfig config;
    config.epsilon = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.epsilon = 0.5;
    config.alpha = 1.5;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config.alpha = 0.5;
    config.repetitions = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}
