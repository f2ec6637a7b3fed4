#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bodega/adversaries.hpp"
#include "bodega/analytic.hpp"
#include "bodega/urlgen.hpp"

using namespace bodega;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

struct AnalyzeArgs {
    AnalyticScenario scenario;
    std::string axis = "alpha";
    double grid_start = 0.0, grid_stop = 1.0;
    std::size_t grid_steps = 101;
    std::string out_path = "sweep.csv";
};

int cmd_analyze(const AnalyzeArgs& args) {
    SweepAxis axis;
    if (args.axis == "alpha") axis = SweepAxis::Alpha;
    else if (args.axis == "strategy") axis = SweepAxis::Strategy;
    else if (args.axis == "qn") axis = SweepAxis::QN;
    else if (args.axis == "memory") axis = SweepAxis::Memory;
    else throw ConfigError("unknown sweep axis: " + args.axis);

    if (args.grid_steps < 1) throw ConfigError("grid needs at least one point");
    std::vector<double> grid;
    for (std::size_t i = 0; i < args.grid_steps; ++i) {
        double v = args.grid_steps == 1
                       ? args.grid_start
                       : args.grid_start + (args.grid_stop - args.grid_start) *
                                               static_cast<double>(i) /
                                               static_cast<double>(args.grid_steps - 1);
        grid.push_back(v);
    }
    SweepTable table = sweep(args.scenario, axis, grid);
    auto out = open_out(args.out_path);
    write_sweep_csv(out, table);
    return kExitOk;
}

struct BuildMeasureArgs {
    std::string dataset_path;
    std::string kind = "bodega";
    std::uint64_t budget = 20480;
    std::uint64_t model_budget = 10240;
    std::string split = "equal";
    std::string tau_policy = "fpr-min";
    double tau_q = 0.5;
    double sample_frac = 0.1;
    std::uint64_t seed = 1;
    std::string out_path = "measure.csv";
    std::string model_out, model_in;
};

int cmd_build_measure(const BuildMeasureArgs& args) {
    DatasetFile data = load_dataset(args.dataset_path);
    if (data.positives.empty()) throw DataError("dataset has no positive rows");

    KeyedSet s = KeyedSet::from_raw_keys(data.positives);

    // Benign rows: first half feeds training, a fraction of the rest is the
    // FPR measurement sample.
    Rng split_rng(derive_seed(args.seed, 0x5411));
    std::vector<RawKey> benign = data.negatives;
    std::shuffle(benign.begin(), benign.end(), split_rng);
    std::size_t half = benign.size() / 2;
    std::vector<RawKey> train_pool, eval_pool;
    for (std::size_t i = 0; i < benign.size(); ++i) {
        if (s.contains(canonicalize(benign[i]))) continue;
        (i < half ? train_pool : eval_pool).push_back(benign[i]);
    }
    auto sample_n = static_cast<std::size_t>(args.sample_frac *
                                             static_cast<double>(data.negatives.size()));
    if (sample_n > eval_pool.size()) sample_n = eval_pool.size();
    if (sample_n == 0) throw DataError("no benign rows left for measurement");
    eval_pool.resize(sample_n);

    FilterBuildConfig config;
    config.kind = parse_filter_kind(args.kind);
    config.total_bytes = args.budget;
    config.model_budget_bytes = args.model_budget;
    if (args.split != "equal" && args.split != "proportional")
        throw ConfigError("--split must be equal or proportional");
    config.proportional_split = args.split == "proportional";
    if (args.tau_policy == "fpr-min")
        config.threshold.kind = ThresholdPolicy::Kind::FprMinimizing;
    else if (args.tau_policy == "quantile")
        config.threshold = {ThresholdPolicy::Kind::Quantile, args.tau_q};
    else
        throw ConfigError("--tau-policy must be fpr-min or quantile");

    if (!args.model_in.empty()) {
        std::ifstream in(args.model_in, std::ios::binary);
        if (!in) throw DataError("cannot open model file: " + args.model_in);
        Bytes blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        config.pretrained = deserialize_scorer(blob);
    }

    TrainingDataset t = build_training_dataset(s, train_pool, derive_seed(args.seed, 0x7d));
    bool learned = config.kind != FilterKind::Classic && config.kind != FilterKind::Ny &&
                   config.kind != FilterKind::Cuckoo;
    FilterSnapshot snap = build_filter(config, s, learned ? &t : nullptr, args.seed);

    if (!args.model_out.empty() && snap.scorer) {
        Bytes blob = snap.scorer->serialize();
        auto mo = open_out(args.model_out);
        mo.write(reinterpret_cast<const char*>(blob.data()),
                 static_cast<std::streamsize>(blob.size()));
    }

    std::uint64_t fp = 0;
    for (const RawKey& k : eval_pool) fp += snap.contains(Element::from_raw(k));
    double fpr = static_cast<double>(fp) / static_cast<double>(eval_pool.size());
    WilsonInterval ci = wilson_interval(fp, eval_pool.size());

    double eps_p = 0.0, eps_n = 0.0;
    if (snap.scorer) {
        ModelSoundness sound = estimate_soundness(*snap.scorer, snap.meta.tau, s, eval_pool);
        eps_p = sound.eps_p;
        eps_n = sound.eps_n;
    }

    MemoryReport mem = snap.memory_report();
    auto out = open_out(args.out_path);
    out << "# bodega-build-measure-v1\n";
    out << "kind,n,n_a,n_b,tau,skipped,model_bytes,backup_a_bytes,backup_b_bytes,key_bits,"
           "total_bytes,eps_p,eps_n,fpr,fpr_lo,fpr_hi,probes,seed\n";
    out << args.kind << ',' << s.size() << ',' << snap.meta.n_a << ',' << snap.meta.n_b << ','
        << fmt(snap.meta.tau) << ',' << snap.meta.skipped << ',' << mem.model_bytes << ','
        << mem.backup_a_bytes << ',' << mem.backup_b_bytes << ',' << mem.key_bits << ','
        << mem.total_bytes() << ',' << fmt(eps_p) << ',' << fmt(eps_n) << ',' << fmt(fpr)
        << ',' << fmt(ci.lo) << ',' << fmt(ci.hi) << ',' << eval_pool.size() << ','
        << args.seed << '\n';
    if (snap.meta.skipped > 0)
        std::cerr << "warning: " << snap.meta.skipped
                  << " elements skipped after the eviction cap\n";
    return kExitOk;
}

struct AttackArgs {
    std::string dataset_path;
    std::string kind = "bodega";
    std::string adversary = "random-guess";
    std::string game = "lab";
    double alpha = 1.0;
    std::string benign_mode = "uniform";
    std::uint64_t t = 1000;
    std::size_t reps = 100;
    double epsilon = 0.01;
    std::size_t set_size = 1000;
    std::uint64_t budget = 20480;
    std::uint64_t model_budget = 10240;
    std::string split = "equal";
    std::string tau_policy = "fpr-min";
    double tau_q = 0.5;
    double flip_fraction = 0.1;
    std::string wrap = "none";
    double coin_p = 0.05;
    bool no_validate_training = false;
    std::uint64_t seed = 1;
    std::string out_path = "attack.csv";
    std::string transcripts_path;
};

int cmd_attack(const AttackArgs& args) {
    GameConfig game;
    game.game = parse_game_kind(args.game);
    game.t = args.t;
    game.alpha = args.alpha;
    game.epsilon = args.epsilon;
    game.repetitions = args.reps;
    game.seed = args.seed;
    game.set_size = args.set_size;
    game.validate_training = !args.no_validate_training;

    AdversaryParams params;
    params.flip_fraction = args.flip_fraction;
    std::shared_ptr<std::vector<RawKey>> positives, negatives;
    if (!args.dataset_path.empty()) {
        DatasetFile data = load_dataset(args.dataset_path);
        positives = std::make_shared<std::vector<RawKey>>(std::move(data.positives));
        negatives = std::make_shared<std::vector<RawKey>>(std::move(data.negatives));
        params.corpus_positives = positives;
        params.corpus_negatives = negatives;
        if (game.set_size > positives->size()) game.set_size = positives->size();
    }

    ChallengerConfig challenger;
    challenger.build.kind = parse_filter_kind(args.kind);
    challenger.build.total_bytes = args.budget;
    challenger.build.model_budget_bytes = args.model_budget;
    challenger.build.proportional_split = args.split == "proportional";
    if (args.tau_policy == "fpr-min")
        challenger.build.threshold.kind = ThresholdPolicy::Kind::FprMinimizing;
    else
        challenger.build.threshold = {ThresholdPolicy::Kind::Quantile, args.tau_q};
    challenger.negatives_pool = negatives;
    challenger.coin_p = args.coin_p;
    if (args.wrap == "none") challenger.wrap = ChallengerConfig::Wrap::None;
    else if (args.wrap == "repeat-trigger") challenger.wrap = ChallengerConfig::Wrap::RepeatTrigger;
    else if (args.wrap == "key-leak") challenger.wrap = ChallengerConfig::Wrap::KeyLeak;
    else if (args.wrap == "coin") challenger.wrap = ChallengerConfig::Wrap::CoinAlwaysOne;
    else throw ConfigError("--wrap must be none, repeat-trigger, key-leak or coin");

    if (args.benign_mode == "dataset") {
        if (!negatives || negatives->empty())
            throw ConfigError("--benign-mode dataset needs --dataset with benign rows");
        auto corpus = negatives;
        game.benign_sampler = [corpus](Rng& rng) {
            return Element::from_raw((*corpus)[rng() % corpus->size()]);
        };
    } else if (args.benign_mode != "uniform") {
        throw ConfigError("--benign-mode must be uniform or dataset");
    }

    GameRunResult result = run_game(game, make_challenger(challenger, game),
                                    adversary_factory(args.adversary, params));

    auto out = open_out(args.out_path);
    out << "# bodega-attack-v1\n";
    out << "rep,outcome,profit\n";
    for (std::size_t rep = 0; rep < result.transcripts.size(); ++rep) {
        const GameTranscript& tr = result.transcripts[rep];
        const char* outcome = tr.outcome == Outcome::Win    ? "win"
                              : tr.outcome == Outcome::Lose ? "lose"
                                                            : "pass";
        out << rep << ',' << outcome << ',' << fmt(tr.profit) << '\n';
    }
    out << "# wins=" << result.wins() << " reps=" << result.transcripts.size()
        << " win_rate=" << fmt(result.win_rate()) << '\n';
    if (game.game == GameKind::Lbp) {
        ProfitEstimate profit = estimate_profit(result.transcripts);
        out << "# mean_profit=" << fmt(profit.mean) << " ci_lo=" << fmt(profit.ci_lo)
            << " ci_hi=" << fmt(profit.ci_hi) << '\n';
    }
    if (result.trainset_rejections > 0)
        out << "# trainset_rejections=" << result.trainset_rejections << '\n';
    if (result.realized_qn) out << "# realized_qn=" << fmt(*result.realized_qn) << '\n';

    if (!args.transcripts_path.empty()) {
        auto tout = open_out(args.transcripts_path);
        write_transcript_log(tout, result);
    }
    return kExitOk;
}

struct GenArgs {
    std::size_t malicious = 17000;
    std::size_t benign = 42000;
    std::uint64_t seed = 1;
    std::string out_path = "urls.csv";
};

int cmd_gen_dataset(const GenArgs& args) {
    UrlCorpus corpus = generate_url_corpus({args.malicious, args.benign, args.seed});
    auto out = open_out(args.out_path);
    write_dataset(out, corpus);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversary-resilient learned bloom filter experiments"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* an = app.add_subcommand("analyze", "closed-form FPR sweeps");
    an->add_option("--axis", analyze.axis, "alpha|strategy|qn|memory");
    an->add_option("--grid-start", analyze.grid_start);
    an->add_option("--grid-stop", analyze.grid_stop);
    an->add_option("--grid-steps", analyze.grid_steps);
    an->add_option("--n", analyze.scenario.set_size);
    an->add_option("--c", analyze.scenario.c);
    an->add_option("--qn", analyze.scenario.q_n);
    an->add_option("--alpha", analyze.scenario.alpha);
    an->add_option("--alpha-p", analyze.scenario.alpha_p);
    an->add_option("--alpha-n", analyze.scenario.alpha_n);
    an->add_option("--lambda", analyze.scenario.lambda_bits);
    an->add_option("--budget", analyze.scenario.m_total_bytes, "total bytes");
    an->add_option("--model-budget", analyze.scenario.m_model_bytes);
    an->add_option("--backup-a", analyze.scenario.m_backup_a_bytes);
    an->add_option("--backup-b", analyze.scenario.m_backup_b_bytes);
    an->add_option("--backup-a-share", analyze.scenario.backup_a_share);
    an->add_option("--out", analyze.out_path);

    BuildMeasureArgs bm;
    auto* bmc = app.add_subcommand("build-measure", "build a filter, measure FPR and memory");
    bmc->add_option("--dataset", bm.dataset_path)->required();
    bmc->add_option("--kind", bm.kind, "classic|ny|cuckoo|standard|bodega|cuckoo-lbf|trivial");
    bmc->add_option("--budget", bm.budget, "total bytes");
    bmc->add_option("--model-budget", bm.model_budget);
    bmc->add_option("--split", bm.split, "equal|proportional");
    bmc->add_option("--tau-policy", bm.tau_policy, "fpr-min|quantile");
    bmc->add_option("--tau-q", bm.tau_q);
    bmc->add_option("--sample-frac", bm.sample_frac);
    bmc->add_option("--seed", bm.seed);
    bmc->add_option("--out", bm.out_path);
    bmc->add_option("--model-out", bm.model_out, "save the trained scorer blob");
    bmc->add_option("--model-in", bm.model_in, "reuse a saved scorer instead of training");

    AttackArgs at;
    auto* atc = app.add_subcommand("attack", "run a security game");
    atc->add_option("--dataset", at.dataset_path);
    atc->add_option("--kind", at.kind);
    atc->add_option("--adversary", at.adversary);
    atc->add_option("--game", at.game, "lab|lfa|lpa|lbp");
    atc->add_option("--alpha", at.alpha);
    atc->add_option("--benign-mode", at.benign_mode,
                    "uniform (the formal game) or dataset (workload realism)");
    atc->add_option("--t", at.t);
    atc->add_option("--reps", at.reps);
    atc->add_option("--epsilon", at.epsilon);
    atc->add_option("--n", at.set_size);
    atc->add_option("--budget", at.budget);
    atc->add_option("--model-budget", at.model_budget);
    atc->add_option("--split", at.split);
    atc->add_option("--tau-policy", at.tau_policy);
    atc->add_option("--tau-q", at.tau_q);
    atc->add_option("--flip-fraction", at.flip_fraction);
    atc->add_option("--wrap", at.wrap, "none|repeat-trigger|key-leak|coin");
    atc->add_option("--coin-p", at.coin_p);
    atc->add_flag("--no-validate-training", at.no_validate_training);
    atc->add_option("--seed", at.seed);
    atc->add_option("--out", at.out_path);
    atc->add_option("--transcripts", at.transcripts_path);

    GenArgs gen;
    auto* gc = app.add_subcommand("gen-dataset", "emit a synthetic URL dataset");
    gc->add_option("--malicious", gen.malicious);
    gc->add_option("--benign", gen.benign);
    gc->add_option("--seed", gen.seed);
    gc->add_option("--out", gen.out_path);

    try {
        app.parse(argc, argv);
        if (an->parsed()) return cmd_analyze(analyze);
        if (bmc->parsed()) return cmd_build_measure(bm);
        if (atc->parsed()) return cmd_attack(at);
        if (gc->parsed()) return cmd_gen_dataset(gen);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const InvalidInput& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitOk;
}
