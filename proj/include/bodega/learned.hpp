#pragma once

#include <memory>

#include "bodega/domain.hpp"

namespace bodega {

/// The 12-feature URL schema. Features are defined over raw bytes, so any
/// key scores deterministically; on URL-shaped text they carry the intended
/// lexical meaning.
inline constexpr std::size_t kFeatureCount = 12;
using FeatureVector = std::array<double, kFeatureCount>;

enum class UrlFeature : std::size_t {
    Length = 0,
    DigitCount,
    LetterCount,
    SpecialCount,
    ContainsIp,
    Shortener,
    Https,
    HostLength,
    PathDepth,
    QueryParams,
    HyphenCount,
    DotCount,
};

FeatureVector extract_features(const RawKey& key);

/// Pre-filter scorer (the learned component): pure map RawKey -> [0, 1].
class Scorer {
  public:
    virtual ~Scorer() = default;
    virtual double score(const RawKey& key) const = 0;
    virtual std::size_t size_bytes() const = 0;
    virtual Bytes serialize() const = 0;
    virtual std::string_view name() const = 0;
};

using ScorerPtr = std::shared_ptr<const Scorer>;

/// Scores everything 0: routes every query to the backup side.
class TrivialScorer final : public Scorer {
  public:
    double score(const RawKey&) const override { return 0.0; }
    std::size_t size_bytes() const override { return 8; }
    Bytes serialize() const override;
    std::string_view name() const override { return "trivial"; }
};

/// Logistic regression over the 12-feature schema, trained by full-batch
/// gradient descent with a fixed iteration count.
class LogisticScorer final : public Scorer {
  public:
    LogisticScorer(std::array<double, kFeatureCount> weights, double bias);

    double score(const RawKey& key) const override;
    std::size_t size_bytes() const override;
    Bytes serialize() const override;
    std::string_view name() const override { return "logistic"; }

    const std::array<double, kFeatureCount>& weights() const { return weights_; }
    double bias() const { return bias_; }

  private:
    std::array<double, kFeatureCount> weights_;
    double bias_;
};

/// Byte size of the smallest trainable scorer; budgets below it are rejected.
std::size_t min_scorer_bytes();

/// Trains the built-in classifier. Deterministic given the seed; the
/// returned scorer is guaranteed to fit the byte budget.
ScorerPtr train_scorer(const TrainingDataset& t, std::size_t budget_bytes, std::uint64_t seed);

ScorerPtr deserialize_scorer(const Bytes& blob);

struct ThresholdPolicy {
    enum class Kind { Quantile, FprMinimizing };
    Kind kind = Kind::FprMinimizing;
    double quantile = 0.5;  // used by the quantile policy
};

/// Memory context for the fpr-minimizing policy: the backup bytes available
/// and how they split across the two partitions.
struct ThresholdBudget {
    std::uint64_t backup_bytes_total = 0;
    bool proportional_split = false;
    /// Score >= tau rate of the training negatives, per candidate; computed
    /// internally from `negatives`.
    std::vector<RawKey> negatives;
};

double select_threshold(const Scorer& scorer, const KeyedSet& s, const ThresholdPolicy& policy,
                        const ThresholdBudget* budget = nullptr);

struct WilsonInterval {
    double lo = 0.0, hi = 0.0;
};

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n, double z = 1.96);

struct ModelSoundness {
    double eps_p = 0.0;  // negatives scoring >= tau
    double eps_n = 0.0;  // members scoring < tau
    std::size_t negatives_sampled = 0;
    std::size_t positives_sampled = 0;
    WilsonInterval eps_p_ci, eps_n_ci;
};

ModelSoundness estimate_soundness(const Scorer& scorer, double tau, const KeyedSet& s,
                                  std::span<const RawKey> negatives);

}  // namespace bodega
