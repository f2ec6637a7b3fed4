#include "bodega/learned.hpp"

#include <algorithm>
#include <cmath>

#include "bodega/analytic.hpp"

namespace bodega {

namespace {

bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
bool is_letter(unsigned char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

struct UrlParts {
    std::size_t host_begin = 0, host_end = 0;
    std::size_t path_begin = 0;  // == key.size() when absent
    bool https = false;
};

UrlParts split_url(const RawKey& key) {
    UrlParts p;
    std::size_t host_start = 0;
    auto scheme = key.find("://");
    if (scheme != RawKey::npos && scheme > 0 && scheme < 16) {
        host_start = scheme + 3;
        p.https = key.compare(0, scheme, "https") == 0;
    }
    std::size_t host_end = key.size();
    for (std::size_t i = host_start; i < key.size(); ++i) {
        char c = key[i];
        if (c == '/' || c == '?' || c == '#') {
            host_end = i;
            break;
        }
    }
    p.host_begin = host_start;
    p.host_end = host_end;
    p.path_begin = host_end;
    return p;
}

bool host_is_ip(const RawKey& key, const UrlParts& p) {
    // dotted quad of 1..3-digit groups
    int groups = 0, digits = 0;
    for (std::size_t i = p.host_begin; i < p.host_end; ++i) {
        unsigned char c = key[i];
        if (is_digit(c)) {
            if (++digits > 3) return false;
        } else if (c == '.') {
            if (digits == 0) return false;
            ++groups;
            digits = 0;
        } else {
            return false;
        }
    }
    return groups == 3 && digits > 0;
}

const char* kShorteners[] = {"bit.ly", "tinyurl.com", "goo.gl", "t.co", "ow.ly", "is.gd"};

bool host_is_shortener(const RawKey& key, const UrlParts& p) {
    std::string_view host(key.data() + p.host_begin, p.host_end - p.host_begin);
    for (const char* s : kShorteners)
        if (host == s) return true;
    return false;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr std::uint16_t kSchemaTrivial = 1;
constexpr std::uint16_t kSchemaLogistic12 = 2;

void put_scorer_header(Bytes& out, std::uint16_t schema) {
    wire::put_u32(out, wire::kMagic);
    wire::put_u16(out, wire::kVersion);
    wire::put_u16(out, schema);
}

}  // namespace

FeatureVector extract_features(const RawKey& key) {
    FeatureVector f{};
    UrlParts parts = split_url(key);
    std::size_t digits = 0, letters = 0, special = 0, hyphens = 0, dots = 0;
    for (unsigned char c : key) {
        if (is_digit(c)) ++digits;
        else if (is_letter(c)) ++letters;
        else if (c != '.' && c != '/' && c != ':' && c != '-' && c != '_') ++special;
        if (c == '-') ++hyphens;
        if (c == '.') ++dots;
    }
    std::size_t path_slashes = 0, query_params = 0;
    bool in_query = false;
    for (std::size_t i = parts.path_begin; i < key.size(); ++i) {
        char c = key[i];
        if (c == '?' && !in_query) {
            in_query = true;
            query_params = 1;
        } else if (c == '&' && in_query) {
            ++query_params;
        } else if (c == '/' && !in_query) {
            ++path_slashes;
        }
    }
    f[static_cast<std::size_t>(UrlFeature::Length)] = static_cast<double>(key.size());
    f[static_cast<std::size_t>(UrlFeature::DigitCount)] = static_cast<double>(digits);
    f[static_cast<std::size_t>(UrlFeature::LetterCount)] = static_cast<double>(letters);
    f[static_cast<std::size_t>(UrlFeature::SpecialCount)] = static_cast<double>(special);
    f[static_cast<std::size_t>(UrlFeature::ContainsIp)] = host_is_ip(key, parts) ? 1.0 : 0.0;
    f[static_cast<std::size_t>(UrlFeature::Shortener)] = host_is_shortener(key, parts) ? 1.0 : 0.0;
    f[static_cast<std::size_t>(UrlFeature::Https)] = parts.https ? 1.0 : 0.0;
    f[static_cast<std::size_t>(UrlFeature::HostLength)] =
        static_cast<double>(parts.host_end - parts.host_begin);
    f[static_cast<std::size_t>(UrlFeature::PathDepth)] = static_cast<double>(path_slashes);
    f[static_cast<std::size_t>(UrlFeature::QueryParams)] = static_cast<double>(query_params);
    f[static_cast<std::size_t>(UrlFeature::HyphenCount)] = static_cast<double>(hyphens);
    f[static_cast<std::size_t>(UrlFeature::DotCount)] = static_cast<double>(dots);
    return f;
}

Bytes TrivialScorer::serialize() const {
    Bytes out;
    put_scorer_header(out, kSchemaTrivial);
    return out;
}

LogisticScorer::LogisticScorer(std::array<double, kFeatureCount> weights, double bias)
    : weights_(weights), bias_(bias) {}

double LogisticScorer::score(const RawKey& key) const {
    FeatureVector f = extract_features(key);
    double z = bias_;
    for (std::size_t i = 0; i < kFeatureCount; ++i) z += weights_[i] * f[i];
    return sigmoid(z);
}

Bytes LogisticScorer::serialize() const {
    Bytes out;
    put_scorer_header(out, kSchemaLogistic12);
    for (double w : weights_) wire::put_f64(out, w);
    wire::put_f64(out, bias_);
    return out;
}

std::size_t LogisticScorer::size_bytes() const { return 8 + 8 * (kFeatureCount + 1); }

std::size_t min_scorer_bytes() { return 8 + 8 * (kFeatureCount + 1); }

ScorerPtr train_scorer(const TrainingDataset& t, std::size_t budget_bytes, std::uint64_t seed) {
    if (budget_bytes < min_scorer_bytes())
        throw ConfigError("model budget below minimum footprint of " +
                          std::to_string(min_scorer_bytes()) + " bytes");
    if (t.examples.empty()) throw InvalidInput("cannot train on an empty dataset");

    const std::size_t n = t.examples.size();
    std::vector<FeatureVector> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = extract_features(t.examples[i].key);
        ys[i] = t.examples[i].label ? 1.0 : 0.0;
    }

    // Standardize features for the descent, fold the scaling back afterwards.
    std::array<double, kFeatureCount> mean{}, scale{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        double m = 0;
        for (const auto& x : xs) m += x[j];
        m /= static_cast<double>(n);
        double var = 0;
        for (const auto& x : xs) var += (x[j] - m) * (x[j] - m);
        mean[j] = m;
        scale[j] = std::max(std::sqrt(var / static_cast<double>(n)), 1e-9);
    }

    double pos = 0;
    for (double y : ys) pos += y;
    double w_pos = pos > 0 ? static_cast<double>(n) / (2.0 * pos) : 0.0;
    double w_neg = pos < n ? static_cast<double>(n) / (2.0 * (static_cast<double>(n) - pos)) : 0.0;

    std::array<double, kFeatureCount> w{};
    double b = 0.0;
    Rng rng(derive_seed(seed, 0x1061));
    std::uniform_real_distribution<double> init(-1e-3, 1e-3);
    for (auto& wi : w) wi = init(rng);

    constexpr int kIterations = 250;
    constexpr double kL2 = 1e-6;
    for (int iter = 0; iter < kIterations; ++iter) {
        std::array<double, kFeatureCount> grad{};
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b;
            for (std::size_t j = 0; j < kFeatureCount; ++j)
                z += w[j] * (xs[i][j] - mean[j]) / scale[j];
            double err = (sigmoid(z) - ys[i]) * (ys[i] > 0.5 ? w_pos : w_neg);
            for (std::size_t j = 0; j < kFeatureCount; ++j)
                grad[j] += err * (xs[i][j] - mean[j]) / scale[j];
            grad_b += err;
        }
        double lr = 1.0 / (1.0 + 0.01 * iter);
        for (std::size_t j = 0; j < kFeatureCount; ++j)
            w[j] -= lr * (grad[j] / static_cast<double>(n) + kL2 * w[j]);
        b -= lr * grad_b / static_cast<double>(n);
    }

    std::array<double, kFeatureCount> folded{};
    double folded_b = b;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        folded[j] = w[j] / scale[j];
        folded_b -= w[j] * mean[j] / scale[j];
    }
    return std::make_shared<LogisticScorer>(folded, folded_b);
}

ScorerPtr deserialize_scorer(const Bytes& blob) {
    wire::Reader r{&blob};
    if (r.u32() != wire::kMagic) throw DataError("bad scorer magic");
    if (r.u16() != wire::kVersion) throw DataError("unsupported scorer version");
    std::uint16_t schema = r.u16();
    if (schema == kSchemaTrivial) return std::make_shared<TrivialScorer>();
    if (schema == kSchemaLogistic12) {
        std::array<double, kFeatureCount> w{};
        for (auto& wi : w) wi = r.f64();
        double b = r.f64();
        return std::make_shared<LogisticScorer>(w, b);
    }
    throw DataError("unknown scorer schema id");
}

double select_threshold(const Scorer& scorer, const KeyedSet& s, const ThresholdPolicy& policy,
                        const ThresholdBudget* budget) {
    if (s.size() == 0) throw InvalidInput("cannot select a threshold over an empty set");
    std::vector<double> scores;
    scores.reserve(s.size());
    for (const Element& e : s.elements()) scores.push_back(scorer.score(e.raw));
    std::sort(scores.begin(), scores.end());

    auto quantile = [&](double q) {
        double idx = q * static_cast<double>(scores.size() - 1);
        return scores[static_cast<std::size_t>(idx)];
    };

    if (policy.kind == ThresholdPolicy::Kind::Quantile) return quantile(policy.quantile);

    if (!budget) throw ConfigError("fpr-minimizing threshold policy needs a memory context");

    std::vector<double> neg_scores;
    neg_scores.reserve(budget->negatives.size());
    for (const RawKey& k : budget->negatives) neg_scores.push_back(scorer.score(k));
    std::sort(neg_scores.begin(), neg_scores.end());

    std::vector<double> candidates;
    for (int i = 1; i < 100; ++i) candidates.push_back(quantile(i / 100.0));
    candidates.push_back(1.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    const auto n = static_cast<double>(s.size());
    double best_tau = candidates.front();
    double best_rate = 2.0;
    for (double tau : candidates) {
        auto above = static_cast<std::uint64_t>(
            scores.end() - std::lower_bound(scores.begin(), scores.end(), tau));
        std::uint64_t n_a = above, n_b = s.size() - above;
        double fp_l = neg_scores.empty()
                          ? 0.0
                          : static_cast<double>(neg_scores.end() -
                                                std::lower_bound(neg_scores.begin(),
                                                                 neg_scores.end(), tau)) /
                                static_cast<double>(neg_scores.size());
        std::uint64_t m_a, m_b;
        if (budget->proportional_split) {
            m_a = static_cast<std::uint64_t>(static_cast<double>(budget->backup_bytes_total) *
                                             static_cast<double>(n_a) / n);
            m_b = budget->backup_bytes_total - m_a;
        } else {
            m_a = budget->backup_bytes_total / 2;
            m_b = budget->backup_bytes_total - m_a;
        }
        double rate = lbf_fpr_composed(fp_l, cbf_fpr(8 * m_a, n_a), 1.0 - fp_l,
                                       cbf_fpr(8 * m_b, n_b));
        if (rate < best_rate) {
            best_rate = rate;
            best_tau = tau;
        }
    }
    return best_tau;
}

WilsonInterval wilson_interval(std::uint64_t hits, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    double nn = static_cast<double>(n);
    double p = static_cast<double>(hits) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ModelSoundness estimate_soundness(const Scorer& scorer, double tau, const KeyedSet& s,
                                  std::span<const RawKey> negatives) {
    if (s.size() == 0 || negatives.empty())
        throw InvalidInput("soundness rates are undefined on empty inputs");
    ModelSoundness out;
    std::uint64_t fp = 0;
    for (const RawKey& k : negatives) fp += scorer.score(k) >= tau;
    std::uint64_t fn = 0;
    for (const Element& e : s.elements()) fn += scorer.score(e.raw) < tau;
    out.negatives_sampled = negatives.size();
    out.positives_sampled = s.size();
    out.eps_p = static_cast<double>(fp) / static_cast<double>(negatives.size());
    out.eps_n = static_cast<double>(fn) / static_cast<double>(s.size());
    out.eps_p_ci = wilson_interval(fp, negatives.size());
    out.eps_n_ci = wilson_interval(fn, s.size());
    return out;
}

}  // namespace bodega
