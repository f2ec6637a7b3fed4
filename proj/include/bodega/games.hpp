#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <unordered_map>

#include "bodega/lbf.hpp"

namespace bodega {

enum class GameKind { Lab, Lfa, Lpa, Lbp };

std::string_view game_kind_name(GameKind g);
GameKind parse_game_kind(std::string_view name);

struct GameConfig {
    GameKind game = GameKind::Lab;
    std::size_t set_size = 1000;
    std::uint64_t t = 100;     // scored-query budget
    double alpha = 1.0;        // adversarial fraction (LPA)
    double epsilon = 0.01;     // profit scoring target FPR (LBP)
    std::size_t repetitions = 1;
    std::uint64_t seed = 0;
    std::uint64_t oracle_call_cap = 1'000'000;
    bool validate_training = true;

    /// Non-adversarial queries are uniform over the whole domain by default
    /// (the formal game). A corpus-drawn sampler can replace them for
    /// workload realism; such runs sit outside the formal game.
    std::function<Element(Rng&)> benign_sampler;

    void validate() const;
};

struct QueryRecord {
    ElementId x;
    bool answer = false;
    bool adversarial = false;
};

enum class Outcome { Win, Lose, Pass };

struct GameTranscript {
    std::vector<QueryRecord> queries;
    bool bet = true;
    std::optional<ElementId> guess;
    Outcome outcome = Outcome::Lose;
    double profit = 0.0;
    bool trainset_rejected = false;
    std::uint64_t refused_rounds = 0;
};

struct GameRunResult {
    std::vector<GameTranscript> transcripts;
    std::size_t trainset_rejections = 0;
    std::optional<double> realized_qn;  // LPA diagnostic

    std::size_t wins() const;
    double win_rate() const;
};

/// Challenger-side build recipe: given the adversary's set (and optionally
/// its training dataset, already validated), produce the challenge filter.
using FilterFactory =
    std::function<FilterSnapshot(const KeyedSet&, const std::optional<TrainingDataset>&, Rng&)>;

class GameSession;
class Adversary;

/// Oracle surface handed to the adversary. Which members are live depends
/// on the game: LAB grants only the scored query oracle; LFA/LBP add the
/// construction/trainset/model oracles and the challenge representation;
/// LPA adds the construction-side oracles but not the representation.
class AttackContext {
  public:
    GameKind game() const;
    std::uint64_t budget() const;
    std::uint64_t queries_used() const;
    double alpha() const;
    const KeyedSet& stored_set() const;

    /// Serialized challenge snapshot, or nullptr when the game withholds it.
    const Bytes* representation() const;

    /// Scored membership query. Refused (nullopt) once the budget is spent.
    std::optional<bool> query(const Element& x);

    /// B1 on an arbitrary set: returns the serialized representation.
    std::optional<Bytes> build_representation(const KeyedSet& s);
    /// B3 / B4 on adversary-chosen inputs.
    std::optional<TrainingDataset> make_training_set(const KeyedSet& s);
    std::optional<std::pair<ScorerPtr, double>> train_model(const TrainingDataset& t);

  private:
    friend class GameSession;
    friend GameRunResult run_game(const GameConfig&, const FilterFactory&,
                                  const std::function<std::unique_ptr<Adversary>()>&);
    explicit AttackContext(GameSession* session) : session_(session) {}
    GameSession* session_;
};

struct RoundAction {
    bool adversarial = false;  // false: yield this round
    Element x;
};

class Adversary {
  public:
    virtual ~Adversary() = default;
    virtual std::string_view name() const = 0;

    /// A1: the adversary picks the stored set.
    virtual KeyedSet choose_set(std::size_t n, Rng& rng);

    /// Optional adversary-chosen training dataset (poisoning surface).
    virtual std::optional<TrainingDataset> training_set(const KeyedSet& s, Rng& rng);

    /// Called once per repetition before any rounds.
    virtual void begin(AttackContext& ctx, Rng& rng);

    /// One workload round. In LAB/LFA/LBP a yield ends the query phase; in
    /// LPA the challenger substitutes a uniform query and the workload
    /// continues.
    virtual RoundAction propose_round(AttackContext& ctx, std::uint64_t round,
                                      std::uint64_t adversarial_used, Rng& rng);

    virtual void observe(const Element& x, bool answer, bool adversarial);

    /// Final guess for LAB/LFA/LPA.
    virtual Element guess(AttackContext& ctx, Rng& rng);

    /// Bet decision for LBP; bet=false passes.
    virtual std::pair<bool, Element> bet(AttackContext& ctx, Rng& rng);
};

GameRunResult run_game(const GameConfig& config, const FilterFactory& factory,
                       const std::function<std::unique_ptr<Adversary>()>& adversary_factory);

struct ProfitEstimate {
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n = 0;
};

/// Sample mean of LBP profits with a normal 95% confidence interval.
ProfitEstimate estimate_profit(std::span<const GameTranscript> transcripts);

/// Line-delimited log: `rep,round,adversarial,query_hex,answer` records,
/// one `rep,outcome,profit` trailer per repetition.
void write_transcript_log(std::ostream& out, const GameRunResult& result);

// --- pathological counterexample filters ---

/// Tracks per-element query counts; after `threshold` queries of the same
/// element it answers 1 forever. Deliberately unsteady.
class RepeatTriggerFilter final : public Filter {
  public:
    RepeatTriggerFilter(std::shared_ptr<const Filter> inner, std::uint64_t threshold);

    bool contains(const Element& q) const override;
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "repeat_trigger"; }

    bool tripped() const { return tripped_; }

  private:
    std::shared_ptr<const Filter> inner_;
    std::uint64_t threshold_;
    mutable std::unordered_map<ElementId, std::uint64_t, ElementIdHash> counts_;
    mutable bool tripped_ = false;
};

/// Stores the PRP key inside its representation: the snapshot deliberately
/// contains (M, sk).
class KeyLeakFilter final : public Filter {
  public:
    explicit KeyLeakFilter(NyCbf inner);

    bool contains(const Element& q) const override { return inner_.query_id(q.id); }
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "key_leak"; }

  private:
    NyCbf inner_;
};

/// At build time flips a coin with probability p; heads puts the filter in
/// a permanent always-one state, readable from the representation.
class CoinAlwaysOneFilter final : public Filter {
  public:
    CoinAlwaysOneFilter(std::shared_ptr<const Filter> inner, bool coin);
    static CoinAlwaysOneFilter flip(std::shared_ptr<const Filter> inner, double p, Rng& rng);

    bool contains(const Element& q) const override;
    Bytes serialize() const override;
    MemoryReport memory_report() const override;
    std::string_view kind_name() const override { return "coin_always_one"; }

    bool coin() const { return coin_; }

  private:
    std::shared_ptr<const Filter> inner_;
    bool coin_;
};

/// What an adversary can read out of a serialized snapshot.
struct ParsedSnapshot {
    wire::Kind kind;
    std::optional<std::array<std::uint8_t, 16>> leaked_key;
    std::optional<bool> coin;
    std::optional<ClassicBloom> inner_bloom;  // key_leak: the permuted inner filter
    ScorerPtr scorer;                         // learned kinds
    std::optional<double> tau;
};

ParsedSnapshot parse_snapshot(const Bytes& bytes);

// --- challenger recipes ---

struct ChallengerConfig {
    FilterBuildConfig build;
    /// Negatives pool for the challenger's B3; pool entries canonicalizing
    /// into S are dropped. Empty pool: uniform random negatives.
    std::shared_ptr<const std::vector<RawKey>> negatives_pool;
    std::size_t uniform_negatives = 0;  // used when the pool is absent
    std::size_t negatives_cap = 0;      // 0: use the whole pool

    enum class Wrap { None, RepeatTrigger, KeyLeak, CoinAlwaysOne };
    Wrap wrap = Wrap::None;
    std::uint64_t repeat_threshold = 0;  // 0: use the game budget t
    double coin_p = 0.05;
};

FilterFactory make_challenger(const ChallengerConfig& config, const GameConfig& game);

}  // namespace bodega
