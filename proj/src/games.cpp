#include "bodega/games.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <unordered_set>

namespace bodega {

std::string_view game_kind_name(GameKind g) {
    switch (g) {
        case GameKind::Lab: return "lab";
        case GameKind::Lfa: return "lfa";
        case GameKind::Lpa: return "lpa";
        case GameKind::Lbp: return "lbp";
    }
    return "?";
}

GameKind parse_game_kind(std::string_view name) {
    for (GameKind g : {GameKind::Lab, GameKind::Lfa, GameKind::Lpa, GameKind::Lbp})
        if (game_kind_name(g) == name) return g;
    throw ConfigError("unknown game: " + std::string(name));
}

void GameConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw ConfigError("alpha must be in [0, 1]");
    if (epsilon <= 0.0 || epsilon >= 1.0) throw ConfigError("epsilon must be in (0, 1)");
    if (repetitions == 0) throw ConfigError("need at least one repetition");
    if (set_size == 0) throw ConfigError("stored set must be nonempty");
}

std::size_t GameRunResult::wins() const {
    return static_cast<std::size_t>(std::count_if(
        transcripts.begin(), transcripts.end(),
        [](const GameTranscript& t) { return t.outcome == Outcome::Win; }));
}

double GameRunResult::win_rate() const {
    return transcripts.empty()
               ? 0.0
               : static_cast<double>(wins()) / static_cast<double>(transcripts.size());
}

// --- session ---

class GameSession {
  public:
    GameSession(const GameConfig& config, const FilterSnapshot& snapshot, const KeyedSet& s,
                const FilterFactory& factory, Rng& oracle_rng)
        : config_(config), snapshot_(snapshot), s_(s), factory_(factory),
          oracle_rng_(oracle_rng) {
        grants_aux_ = config.game != GameKind::Lab;
        if (config.game == GameKind::Lfa || config.game == GameKind::Lbp)
            representation_ = snapshot.serialize();
    }

    const GameConfig& config_;
    const FilterSnapshot& snapshot_;
    const KeyedSet& s_;
    const FilterFactory& factory_;
    Rng& oracle_rng_;
    std::optional<Bytes> representation_;
    bool grants_aux_ = false;

    GameTranscript transcript_;
    std::unordered_set<ElementId, ElementIdHash> seen_;
    std::uint64_t scored_queries_ = 0;
    std::uint64_t aux_calls_ = 0;

    bool aux_allowed() { return grants_aux_ && aux_calls_++ < config_.oracle_call_cap; }

    std::optional<bool> scored_query(const Element& x, bool adversarial) {
        if (scored_queries_ >= config_.t) return std::nullopt;
        ++scored_queries_;
        bool ans = snapshot_.contains(x);
        transcript_.queries.push_back({x.id, ans, adversarial});
        seen_.insert(x.id);
        return ans;
    }
};

GameKind AttackContext::game() const { return session_->config_.game; }
std::uint64_t AttackContext::budget() const { return session_->config_.t; }
std::uint64_t AttackContext::queries_used() const { return session_->scored_queries_; }
double AttackContext::alpha() const { return session_->config_.alpha; }
const KeyedSet& AttackContext::stored_set() const { return session_->s_; }

const Bytes* AttackContext::representation() const {
    return session_->representation_ ? &*session_->representation_ : nullptr;
}

std::optional<bool> AttackContext::query(const Element& x) {
    // The interleaved round protocol is the only scored-query path in the
    // partially-adaptive game.
    if (session_->config_.game == GameKind::Lpa) return std::nullopt;
    return session_->scored_query(x, true);
}

std::optional<Bytes> AttackContext::build_representation(const KeyedSet& s) {
    if (!session_->aux_allowed()) return std::nullopt;
    FilterSnapshot snap = session_->factory_(s, std::nullopt, session_->oracle_rng_);
    return snap.serialize();
}

std::optional<TrainingDataset> AttackContext::make_training_set(const KeyedSet& s) {
    if (!session_->aux_allowed()) return std::nullopt;
    std::vector<RawKey> pool;
    pool.reserve(s.size());
    while (pool.size() < s.size()) {
        Element e = Element::random(session_->oracle_rng_);
        if (!s.contains(e.id)) pool.push_back(e.raw);
    }
    return build_training_dataset(s, pool, session_->oracle_rng_());
}

std::optional<std::pair<ScorerPtr, double>> AttackContext::train_model(
    const TrainingDataset& t) {
    if (!session_->aux_allowed()) return std::nullopt;
    ScorerPtr scorer = train_scorer(t, 1 << 20, session_->oracle_rng_());
    std::vector<Element> members;
    for (const LabeledExample& e : t.examples)
        if (e.label) members.push_back({e.id, e.key});
    double tau = 0.5;
    if (!members.empty()) {
        KeyedSet s(std::move(members));
        tau = select_threshold(*scorer, s, {ThresholdPolicy::Kind::Quantile, 0.5});
    }
    return std::make_pair(scorer, tau);
}

// --- adversary defaults ---

KeyedSet Adversary::choose_set(std::size_t n, Rng& rng) { return KeyedSet::random(n, rng); }

std::optional<TrainingDataset> Adversary::training_set(const KeyedSet&, Rng&) {
    return std::nullopt;
}

void Adversary::begin(AttackContext&, Rng&) {}

RoundAction Adversary::propose_round(AttackContext&, std::uint64_t, std::uint64_t, Rng&) {
    return {};  // yield
}

void Adversary::observe(const Element&, bool, bool) {}

Element Adversary::guess(AttackContext&, Rng& rng) { return Element::random(rng); }

std::pair<bool, Element> Adversary::bet(AttackContext& ctx, Rng& rng) {
    return {true, guess(ctx, rng)};
}

// --- runner ---

GameRunResult run_game(const GameConfig& config, const FilterFactory& factory,
                       const std::function<std::unique_ptr<Adversary>()>& adversary_factory) {
    config.validate();
    GameRunResult result;
    result.transcripts.reserve(config.repetitions);
    std::uint64_t benign_tn = 0, benign_total = 0;

    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        Rng adv_rng(derive_seed(config.seed, rep * 8 + 1));
        Rng build_rng(derive_seed(config.seed, rep * 8 + 2));
        Rng workload_rng(derive_seed(config.seed, rep * 8 + 3));
        Rng oracle_rng(derive_seed(config.seed, rep * 8 + 4));

        std::unique_ptr<Adversary> adversary = adversary_factory();
        KeyedSet s = adversary->choose_set(config.set_size, adv_rng);

        std::optional<TrainingDataset> t_override = adversary->training_set(s, adv_rng);
        bool rejected = false;
        if (t_override && config.validate_training &&
            !validate_training_dataset(*t_override, s)) {
            rejected = true;
            t_override.reset();  // challenger falls back to its own dataset
        }

        FilterSnapshot snapshot = factory(s, t_override, build_rng);
        GameSession session(config, snapshot, s, factory, oracle_rng);
        session.transcript_.trainset_rejected = rejected;
        AttackContext ctx(&session);

        adversary->begin(ctx, adv_rng);

        const bool lpa = config.game == GameKind::Lpa;
        const auto adversarial_cap =
            lpa ? static_cast<std::uint64_t>(
                      std::floor(config.alpha * static_cast<double>(config.t)))
                : config.t;
        std::uint64_t beta = 0;
        for (std::uint64_t round = 0; round < config.t; ++round) {
            if (ctx.queries_used() >= config.t) break;
            RoundAction action = adversary->propose_round(ctx, round, beta, adv_rng);
            if (!lpa) {
                if (!action.adversarial) break;
                auto ans = session.scored_query(action.x, true);
                if (!ans) break;
                adversary->observe(action.x, *ans, true);
                ++beta;
            } else {
                bool use_adversarial = action.adversarial && beta < adversarial_cap;
                if (action.adversarial && !use_adversarial)
                    ++session.transcript_.refused_rounds;
                Element x = use_adversarial ? action.x
                            : config.benign_sampler ? config.benign_sampler(workload_rng)
                                                    : Element::random(workload_rng);
                auto ans = session.scored_query(x, use_adversarial);
                if (!ans) break;
                adversary->observe(x, *ans, use_adversarial);
                if (use_adversarial) {
                    ++beta;
                } else if (snapshot.scorer) {
                    ++benign_total;
                    benign_tn += snapshot.scorer->score(x.raw) < snapshot.meta.tau;
                }
            }
        }

        GameTranscript& tr = session.transcript_;
        auto fresh_false_positive = [&](const Element& g) {
            if (s.contains(g.id) || session.seen_.count(g.id)) return false;
            return snapshot.contains(g);
        };

        if (config.game == GameKind::Lbp) {
            auto [wants_bet, g] = adversary->bet(ctx, adv_rng);
            tr.bet = wants_bet;
            if (!wants_bet) {
                tr.outcome = Outcome::Pass;
                tr.profit = 0.0;
            } else {
                tr.guess = g.id;
                bool win = fresh_false_positive(g);
                tr.outcome = win ? Outcome::Win : Outcome::Lose;
                tr.profit = win ? 1.0 / config.epsilon : -1.0 / (1.0 - config.epsilon);
            }
        } else {
            Element g = adversary->guess(ctx, adv_rng);
            tr.guess = g.id;
            tr.outcome = fresh_false_positive(g) ? Outcome::Win : Outcome::Lose;
        }
        result.trainset_rejections += rejected;
        result.transcripts.push_back(std::move(session.transcript_));
    }
    if (benign_total > 0)
        result.realized_qn =
            static_cast<double>(benign_tn) / static_cast<double>(benign_total);
    return result;
}

ProfitEstimate estimate_profit(std::span<const GameTranscript> transcripts) {
    if (transcripts.empty()) throw InvalidInput("profit is undefined over zero transcripts");
    ProfitEstimate est;
    est.n = transcripts.size();
    double sum = 0.0;
    for (const GameTranscript& t : transcripts) sum += t.profit;
    est.mean = sum / static_cast<double>(est.n);
    double var = 0.0;
    for (const GameTranscript& t : transcripts) {
        double d = t.profit - est.mean;
        var += d * d;
    }
    var = est.n > 1 ? var / static_cast<double>(est.n - 1) : 0.0;
    double half = 1.96 * std::sqrt(var / static_cast<double>(est.n));
    est.ci_lo = est.mean - half;
    est.ci_hi = est.mean + half;
    return est;
}

void write_transcript_log(std::ostream& out, const GameRunResult& result) {
    char buf[64];
    for (std::size_t rep = 0; rep < result.transcripts.size(); ++rep) {
        const GameTranscript& tr = result.transcripts[rep];
        for (std::size_t round = 0; round < tr.queries.size(); ++round) {
            const QueryRecord& q = tr.queries[round];
            out << rep << ',' << round << ',' << (q.adversarial ? 1 : 0) << ',' << q.x.hex()
                << ',' << (q.answer ? 1 : 0) << '\n';
        }
        const char* outcome = tr.outcome == Outcome::Win    ? "win"
                              : tr.outcome == Outcome::Lose ? "lose"
                                                            : "pass";
        std::snprintf(buf, sizeof(buf), "%.12g", tr.profit);
        out << rep << ',' << outcome << ',' << buf << '\n';
    }
}

// --- pathological filters ---

RepeatTriggerFilter::RepeatTriggerFilter(std::shared_ptr<const Filter> inner,
                                         std::uint64_t threshold)
    : inner_(std::move(inner)), threshold_(std::max<std::uint64_t>(1, threshold)) {}

bool RepeatTriggerFilter::contains(const Element& q) const {
    if (tripped_) return true;
    bool ans = inner_->contains(q);
    if (++counts_[q.id] >= threshold_) tripped_ = true;
    return ans;
}

Bytes RepeatTriggerFilter::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::RepeatTrigger));
    wire::put_u64(out, threshold_);
    wire::put_u8(out, tripped_ ? 1 : 0);
    Bytes inner = inner_->serialize();
    wire::put_u64(out, inner.size());
    out.insert(out.end(), inner.begin(), inner.end());
    return out;
}

MemoryReport RepeatTriggerFilter::memory_report() const { return inner_->memory_report(); }

KeyLeakFilter::KeyLeakFilter(NyCbf inner) : inner_(std::move(inner)) {}

Bytes KeyLeakFilter::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::KeyLeak));
    const auto& key = inner_.prp().key().material();
    out.insert(out.end(), key.begin(), key.end());
    Bytes inner = inner_.inner().serialize();
    wire::put_u64(out, inner.size());
    out.insert(out.end(), inner.begin(), inner.end());
    return out;
}

MemoryReport KeyLeakFilter::memory_report() const { return inner_.memory_report(); }

CoinAlwaysOneFilter::CoinAlwaysOneFilter(std::shared_ptr<const Filter> inner, bool coin)
    : inner_(std::move(inner)), coin_(coin) {}

CoinAlwaysOneFilter CoinAlwaysOneFilter::flip(std::shared_ptr<const Filter> inner, double p,
                                              Rng& rng) {
    std::bernoulli_distribution coin(p);
    return CoinAlwaysOneFilter(std::move(inner), coin(rng));
}

bool CoinAlwaysOneFilter::contains(const Element& q) const {
    return coin_ ? true : inner_->contains(q);
}

Bytes CoinAlwaysOneFilter::serialize() const {
    Bytes out;
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, static_cast<std::uint16_t>(wire::Kind::CoinAlwaysOne));
    wire::put_u8(out, coin_ ? 1 : 0);
    Bytes inner = inner_->serialize();
    wire::put_u64(out, inner.size());
    out.insert(out.end(), inner.begin(), inner.end());
    return out;
}

MemoryReport CoinAlwaysOneFilter::memory_report() const { return inner_->memory_report(); }

// --- snapshot parsing ---

ParsedSnapshot parse_snapshot(const Bytes& bytes) {
    wire::Reader r{&bytes};
    ParsedSnapshot out{};
    if (r.u32() != wire::kMagic) throw DataError("bad snapshot magic");
    if (r.u16() != wire::kVersion) throw DataError("unsupported snapshot version");
    out.kind = static_cast<wire::Kind>(r.u16());
    switch (out.kind) {
        case wire::Kind::KeyLeak: {
            std::array<std::uint8_t, 16> key{};
            r.raw(key.data(), key.size());
            out.leaked_key = key;
            std::uint64_t len = r.u64();
            r.require(len);
            Bytes inner(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + len));
            wire::Reader ir{&inner};
            out.inner_bloom = ClassicBloom::deserialize(ir);
            break;
        }
        case wire::Kind::CoinAlwaysOne:
            out.coin = r.u8() != 0;
            break;
        case wire::Kind::StandardLbf:
        case wire::Kind::BodegaLbf:
        case wire::Kind::CuckooLbf:
        case wire::Kind::TrivialLbf: {
            out.tau = r.f64();
            std::uint64_t len = r.u64();
            r.require(len);
            Bytes blob(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                       bytes.begin() + static_cast<std::ptrdiff_t>(r.pos + len));
            out.scorer = deserialize_scorer(blob);
            break;
        }
        default: break;
    }
    return out;
}

// --- challenger recipes ---

FilterFactory make_challenger(const ChallengerConfig& config, const GameConfig& game) {
    return [cfg = config, game_cfg = game](const KeyedSet& s,
                                           const std::optional<TrainingDataset>& t_override,
                                           Rng& rng) -> FilterSnapshot {
        std::uint64_t build_seed = rng();

        if (cfg.wrap == ChallengerConfig::Wrap::KeyLeak) {
            // The leak gadget wraps the PRP-hardened filter directly.
            std::uint64_t lambda_bytes = SecretKey::kLambdaBits / 8;
            if (cfg.build.total_bytes <= lambda_bytes)
                throw ConfigError("budget cannot cover the PRP key");
            BloomParams params;
            params.n_bits = (cfg.build.total_bytes - lambda_bytes) * 8;
            params.expected_n = s.size();
            params.n_hashes = s.size() ? optimal_hash_count(params.n_bits, s.size()) : 1;
            SecretKey sk = keygen(128, derive_seed(build_seed, 0x6ea1));
            NyCbf ny = NyCbf::build(s, params, sk, derive_seed(build_seed, 0xb));
            FilterSnapshot snap;
            snap.meta.kind = FilterKind::Ny;
            snap.meta.n = s.size();
            snap.filter = std::make_shared<KeyLeakFilter>(std::move(ny));
            return snap;
        }

        bool learned = cfg.build.kind == FilterKind::Standard ||
                       cfg.build.kind == FilterKind::Bodega ||
                       cfg.build.kind == FilterKind::CuckooLbf ||
                       cfg.build.kind == FilterKind::Trivial;
        FilterSnapshot base;
        if (learned) {
            FilterBuildConfig build_cfg = cfg.build;
            TrainingDataset t;
            if (t_override) {
                t = *t_override;
                // The runner already applied (or deliberately skipped) the
                // challenger's validation step.
                build_cfg.validate_dataset = false;
            } else {
                std::vector<RawKey> pool;
                if (cfg.negatives_pool) {
                    for (const RawKey& k : *cfg.negatives_pool) {
                        if (cfg.negatives_cap && pool.size() >= cfg.negatives_cap) break;
                        if (!s.contains(canonicalize(k))) pool.push_back(k);
                    }
                } else {
                    std::size_t want = cfg.uniform_negatives ? cfg.uniform_negatives : s.size();
                    while (pool.size() < want) {
                        Element e = Element::random(rng);
                        if (!s.contains(e.id)) pool.push_back(e.raw);
                    }
                }
                t = build_training_dataset(s, pool, derive_seed(build_seed, 0x7535));
            }
            base = build_filter(build_cfg, s, &t, build_seed);
        } else {
            base = build_filter(cfg.build, s, nullptr, build_seed);
        }

        switch (cfg.wrap) {
            case ChallengerConfig::Wrap::RepeatTrigger: {
                std::uint64_t threshold =
                    cfg.repeat_threshold ? cfg.repeat_threshold : game_cfg.t;
                base.filter = std::make_shared<RepeatTriggerFilter>(base.filter, threshold);
                break;
            }
            case ChallengerConfig::Wrap::CoinAlwaysOne: {
                Rng coin_rng(derive_seed(build_seed, 0xc01));
                base.filter = std::make_shared<CoinAlwaysOneFilter>(
                    CoinAlwaysOneFilter::flip(base.filter, cfg.coin_p, coin_rng));
                break;
            }
            default: break;
        }
        return base;
    };
}

}  // namespace bodega
