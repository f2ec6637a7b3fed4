#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bodega/adversaries.hpp"
#include "bodega/analytic.hpp"
#include "bodega/urlgen.hpp"

namespace py = pybind11;
using namespace bodega;

namespace {

FilterSnapshot build_from_lists(const std::string& kind,
                                const std::vector<std::string>& positives,
                                const std::vector<std::string>& negatives,
                                std::uint64_t total_bytes, std::uint64_t model_budget,
                                bool proportional_split, const std::string& tau_policy,
                                double tau_q, std::uint64_t seed) {
    FilterBuildConfig config;
    config.kind = parse_filter_kind(kind);
    config.total_bytes = total_bytes;
    config.model_budget_bytes = model_budget;
    config.proportional_split = proportional_split;
    if (tau_policy == "fpr-min")
        config.threshold.kind = ThresholdPolicy::Kind::FprMinimizing;
    else if (tau_policy == "quantile")
        config.threshold = {ThresholdPolicy::Kind::Quantile, tau_q};
    else
        throw ConfigError("tau_policy must be fpr-min or quantile");

    KeyedSet s = KeyedSet::from_raw_keys(positives);
    bool learned = config.kind != FilterKind::Classic && config.kind != FilterKind::Ny &&
                   config.kind != FilterKind::Cuckoo;
    if (!learned) return build_filter(config, s, nullptr, seed);

    std::vector<RawKey> pool;
    for (const RawKey& k : negatives)
        if (!s.contains(canonicalize(k))) pool.push_back(k);
    TrainingDataset t = build_training_dataset(s, pool, derive_seed(seed, 0x7d));
    return build_filter(config, s, &t, seed);
}

py::dict run_attack(const std::string& kind, const std::string& adversary,
                    const std::string& game_name, std::size_t set_size, std::uint64_t t,
                    double alpha, double epsilon, std::size_t reps, std::uint64_t seed,
                    std::uint64_t total_bytes, std::uint64_t model_budget,
                    const std::string& wrap, double coin_p, double flip_fraction,
                    const std::vector<std::string>& positives,
                    const std::vector<std::string>& negatives) {
    GameConfig game;
    game.game = parse_game_kind(game_name);
    game.set_size = set_size;
    game.t = t;
    game.alpha = alpha;
    game.epsilon = epsilon;
    game.repetitions = reps;
    game.seed = seed;

    AdversaryParams params;
    params.flip_fraction = flip_fraction;
    if (!positives.empty()) {
        params.corpus_positives = std::make_shared<std::vector<RawKey>>(positives);
        if (game.set_size > positives.size()) game.set_size = positives.size();
    }
    if (!negatives.empty())
        params.corpus_negatives = std::make_shared<std::vector<RawKey>>(negatives);

    ChallengerConfig challenger;
    challenger.build.kind = parse_filter_kind(kind);
    challenger.build.total_bytes = total_bytes;
    challenger.build.model_budget_bytes = model_budget;
    challenger.build.threshold = {ThresholdPolicy::Kind::Quantile, 0.1};
    challenger.negatives_pool = params.corpus_negatives;
    challenger.coin_p = coin_p;
    if (wrap == "none") challenger.wrap = ChallengerConfig::Wrap::None;
    else if (wrap == "repeat-trigger") challenger.wrap = ChallengerConfig::Wrap::RepeatTrigger;
    else if (wrap == "key-leak") challenger.wrap = ChallengerConfig::Wrap::KeyLeak;
    else if (wrap == "coin") challenger.wrap = ChallengerConfig::Wrap::CoinAlwaysOne;
    else throw ConfigError("wrap must be none, repeat-trigger, key-leak or coin");

    GameRunResult result = run_game(game, make_challenger(challenger, game),
                                    adversary_factory(adversary, params));
    py::dict out;
    out["wins"] = result.wins();
    out["reps"] = result.transcripts.size();
    out["win_rate"] = result.win_rate();
    out["trainset_rejections"] = result.trainset_rejections;
    if (game.game == GameKind::Lbp) {
        ProfitEstimate est = estimate_profit(result.transcripts);
        out["mean_profit"] = est.mean;
        out["profit_ci"] = py::make_tuple(est.ci_lo, est.ci_hi);
    }
    if (result.realized_qn) out["realized_qn"] = *result.realized_qn;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "keyed learned bloom filters with adversarial security games";

    py::register_exception<ConfigError>(m, "BodegaConfigError", PyExc_ValueError);
    py::register_exception<InvalidInput>(m, "BodegaInvalidInput", PyExc_ValueError);
    py::register_exception<DataError>(m, "BodegaDataError", PyExc_IOError);

    m.def("canonicalize",
          [](const std::string& key) { return canonicalize(key).hex(); },
          py::arg("key"), "map a raw key onto the 128-bit domain, hex-encoded");

    m.def("extract_features",
          [](const std::string& key) {
              FeatureVector f = extract_features(key);
              return std::vector<double>(f.begin(), f.end());
          },
          py::arg("key"));

    m.def("optimal_hash_count", &optimal_hash_count, py::arg("n_bits"), py::arg("n"));
    m.def("cbf_fpr", &cbf_fpr, py::arg("n_bits"), py::arg("n"));
    m.def("learned_rates",
          [](std::uint64_t n_bits, std::uint64_t n, double c, double q_n) {
              LearnedRates r = learned_rates(n_bits, n, c, q_n);
              return py::make_tuple(r.fp_l, r.tn_l);
          },
          py::arg("n_bits_equiv"), py::arg("n"), py::arg("c"), py::arg("q_n"));
    m.def("lbf_fpr_composed", &lbf_fpr_composed, py::arg("fp_l"), py::arg("fp_a"),
          py::arg("tn_l"), py::arg("fp_b"));
    m.def("adversarial_bound", &adversarial_bound, py::arg("fp_a"), py::arg("fp_b"));

    py::class_<AnalyticScenario>(m, "AnalyticScenario")
        .def(py::init<>())
        .def_readwrite("m_total_bytes", &AnalyticScenario::m_total_bytes)
        .def_readwrite("m_model_bytes", &AnalyticScenario::m_model_bytes)
        .def_readwrite("m_backup_a_bytes", &AnalyticScenario::m_backup_a_bytes)
        .def_readwrite("m_backup_b_bytes", &AnalyticScenario::m_backup_b_bytes)
        .def_readwrite("set_size", &AnalyticScenario::set_size)
        .def_readwrite("c", &AnalyticScenario::c)
        .def_readwrite("q_n", &AnalyticScenario::q_n)
        .def_readwrite("alpha", &AnalyticScenario::alpha)
        .def_readwrite("alpha_p", &AnalyticScenario::alpha_p)
        .def_readwrite("alpha_n", &AnalyticScenario::alpha_n)
        .def_readwrite("lambda_bits", &AnalyticScenario::lambda_bits)
        .def_readwrite("backup_a_share", &AnalyticScenario::backup_a_share)
        .def_static("table1", &AnalyticScenario::table1);

    m.def("mixed_workload_fpr", &mixed_workload_fpr, py::arg("scenario"));

    m.def("sweep",
          [](const AnalyticScenario& base, const std::string& axis,
             const std::vector<double>& grid) {
              SweepAxis a;
              if (axis == "alpha") a = SweepAxis::Alpha;
              else if (axis == "strategy") a = SweepAxis::Strategy;
              else if (axis == "qn") a = SweepAxis::QN;
              else if (axis == "memory") a = SweepAxis::Memory;
              else throw ConfigError("unknown sweep axis: " + axis);
              SweepTable t = sweep(base, a, grid);
              std::vector<py::tuple> rows;
              rows.reserve(t.rows.size());
              for (const SweepRow& r : t.rows)
                  rows.push_back(py::make_tuple(r.axis_value, r.bodega_fpr, r.ny_cbf_fpr));
              return rows;
          },
          py::arg("scenario"), py::arg("axis"), py::arg("grid"));

    py::class_<FilterSnapshot>(m, "Filter")
        .def("contains",
             [](const FilterSnapshot& f, const std::string& key) {
                 return f.contains(Element::from_raw(key));
             },
             py::arg("key"))
        .def("serialize",
             [](const FilterSnapshot& f) {
                 Bytes b = f.serialize();
                 return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
             })
        .def("memory_report",
             [](const FilterSnapshot& f) {
                 MemoryReport r = f.memory_report();
                 py::dict out;
                 out["model_bytes"] = r.model_bytes;
                 out["backup_a_bytes"] = r.backup_a_bytes;
                 out["backup_b_bytes"] = r.backup_b_bytes;
                 out["key_bits"] = r.key_bits;
                 out["total_bytes"] = r.total_bytes();
                 return out;
             })
        .def_property_readonly("kind",
                               [](const FilterSnapshot& f) {
                                   return std::string(f.filter->kind_name());
                               })
        .def_property_readonly("tau", [](const FilterSnapshot& f) { return f.meta.tau; })
        .def_property_readonly("n_a", [](const FilterSnapshot& f) { return f.meta.n_a; })
        .def_property_readonly("n_b", [](const FilterSnapshot& f) { return f.meta.n_b; })
        .def_property_readonly("skipped",
                               [](const FilterSnapshot& f) { return f.meta.skipped; });

    m.def("build_filter", &build_from_lists, py::arg("kind"), py::arg("positives"),
          py::arg("negatives") = std::vector<std::string>{}, py::arg("total_bytes") = 20480,
          py::arg("model_budget") = 10240, py::arg("proportional_split") = false,
          py::arg("tau_policy") = "fpr-min", py::arg("tau_q") = 0.5, py::arg("seed") = 1);

    m.def("generate_url_corpus",
          [](std::size_t malicious, std::size_t benign, std::uint64_t seed) {
              UrlCorpus c = generate_url_corpus({malicious, benign, seed});
              return py::make_tuple(c.malicious, c.benign);
          },
          py::arg("malicious"), py::arg("benign"), py::arg("seed") = 1);

    m.def("run_attack", &run_attack, py::arg("kind"), py::arg("adversary"), py::arg("game"),
          py::arg("set_size") = 1000, py::arg("t") = 100, py::arg("alpha") = 1.0,
          py::arg("epsilon") = 0.01, py::arg("reps") = 50, py::arg("seed") = 1,
          py::arg("total_bytes") = 20480, py::arg("model_budget") = 10240,
          py::arg("wrap") = "none", py::arg("coin_p") = 0.05,
          py::arg("flip_fraction") = 0.1,
          py::arg("positives") = std::vector<std::string>{},
          py::arg("negatives") = std::vector<std::string>{});

    m.def("adversary_names", [] {
        std::vector<std::string> names;
        for (const AdversaryInfo& info : builtin_adversaries()) names.push_back(info.name);
        return names;
    });
}
