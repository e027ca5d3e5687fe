#include "commands.hpp"

#include "eals/baselines.hpp"
#include "eals/dataset.hpp"
#include "eals/error.hpp"
#include "eals/eval.hpp"
#include "eals/ingest.hpp"
#include "eals/model.hpp"
#include "eals/online.hpp"
#include "eals/synthetic.hpp"
#include "eals/trainer.hpp"
#include "eals/weighting.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace eals::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* version = EALS_VERSION;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

void close_out(std::ofstream& out, const std::string& path) {
    out.close();
    if (!out) throw IoError("write failed for " + path);
}

InteractionDataset load_snapshot(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_dataset_snapshot(in);
}

FactorModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_model_snapshot(in);
}

void write_manifest(const std::string& path, const std::string& command, json config,
                    const std::string& input_path, std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["version"] = version;
    m["dataset_fingerprint"] = file_fingerprint(input_path);
    m["seed"] = seed;
    m["config"] = std::move(config);
    auto out = open_out(path);
    out << m.dump(2) << '\n';
    close_out(out, path);
}

SplitPair make_split(const InteractionDataset& data, const std::string& kind, double test_fraction) {
    if (kind == "loo") return split_leave_one_out(data);
    if (kind == "chrono") return split_chronological(data, test_fraction);
    SplitPair all;
    all.train = data;
    all.users = data.users();
    all.items = data.items();
    return all;
}

void check_dimensions(const FactorModel& model, const InteractionDataset& train) {
    if (model.num_users() != train.num_users() || model.num_items() != train.num_items()) {
        std::ostringstream msg;
        msg << "model is " << model.num_users() << "x" << model.num_items() << " but the training split is "
            << train.num_users() << "x" << train.num_items();
        throw InvalidInput(msg.str());
    }
}

// ---------------------------------------------------------------------------

struct PrepareArgs {
    std::string input;
    std::string output;
    std::string format = "tsv";
    int kcore = 10;
};

int cmd_prepare(const PrepareArgs& a, std::ostream& out, std::ostream& err) {
    const auto raw = load_interactions(a.input, parse_text_format(a.format));
    const auto filtered = kcore_filter(raw, a.kcore);
    const auto data = build_dataset(filtered);
    auto file = open_out(a.output);
    write_dataset_snapshot(file, data);
    close_out(file, a.output);
    write_manifest(a.output + ".manifest.json", "prepare", json{{"kcore", a.kcore}, {"format", a.format}}, a.input, 0);
    out << "users=" << data.num_users() << " items=" << data.num_items() << " nnz=" << data.nnz() << '\n';
    if (data.nnz() == 0) {
        err << "warning: no interactions survive the " << a.kcore << "-core filter\n";
        return exit_validation;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string dataset;
    std::string model_out;
    std::string learner = "eals";
    std::size_t factors = 64;
    double reg = 0.01;
    double c0 = 512.0;
    double alpha = 0.5;
    double w0 = 0.0;
    int iters = 500;
    double tol = 1e-5;
    std::uint64_t seed = 42;
    int threads = 1;
    std::string split = "loo";
    double test_fraction = 0.1;
    double lr = 0.05;
    int epochs = 50;
    std::string weights_out;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const auto data = load_snapshot(a.dataset);
    const auto split = make_split(data, a.split, a.test_fraction);
    const auto& train_data = split.train;
    if (train_data.nnz() == 0) throw InvalidInput("training split is empty");

    json config{{"learner", a.learner}, {"factors", a.factors}, {"reg", a.reg},     {"iters", a.iters},
                {"tol", a.tol},         {"threads", a.threads}, {"split", a.split}, {"test_fraction", a.test_fraction}};
    TrainResult result;
    if (a.learner == "eals") {
        const auto weights = confidence_vector(item_popularity(train_data), a.c0, a.alpha);
        TrainConfig cfg;
        cfg.factors = a.factors;
        cfg.lambda = a.reg;
        cfg.max_iters = a.iters;
        cfg.rel_tol = a.tol;
        cfg.seed = a.seed;
        cfg.threads = a.threads;
        result = train(train_data, weights, cfg);
        config["c0"] = a.c0;
        config["alpha"] = a.alpha;
        if (!a.weights_out.empty()) {
            auto w = open_out(a.weights_out);
            write_confidence(w, weights);
            close_out(w, a.weights_out);
        }
    } else if (a.learner == "als") {
        AlsConfig cfg;
        cfg.factors = a.factors;
        cfg.lambda = a.reg;
        cfg.w0 = a.w0 > 0.0 ? a.w0 : a.c0 / static_cast<double>(train_data.num_items());
        cfg.max_iters = a.iters;
        cfg.rel_tol = a.tol;
        cfg.seed = a.seed;
        cfg.threads = a.threads;
        result = als_train(train_data, cfg);
        config["w0"] = cfg.w0;
    } else {
        BprConfig cfg;
        cfg.factors = a.factors;
        cfg.lambda = a.reg;
        cfg.learning_rate = a.lr;
        cfg.epochs = a.epochs;
        cfg.seed = a.seed;
        result = bpr_train(train_data, cfg);
        config["lr"] = a.lr;
        config["epochs"] = a.epochs;
    }

    auto file = open_out(a.model_out);
    write_model_snapshot(file, result.model);
    close_out(file, a.model_out);
    const auto trace_path = a.model_out + ".trace.jsonl";
    auto trace = open_out(trace_path);
    write_trace_jsonl(trace, result.trace);
    close_out(trace, trace_path);
    write_manifest(a.model_out + ".manifest.json", "train", std::move(config), a.dataset, a.seed);

    out << "learner=" << a.learner << " iters=" << result.trace.size();
    if (!result.trace.empty()) out << " objective=" << std::setprecision(10) << result.trace.back().objective;
    out << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string model;
    std::string dataset;
    std::string split = "loo";
    double test_fraction = 0.1;
    std::size_t cutoff = 100;
    bool exclude_train = false;
    int threads = 1;
    std::string report;
    std::string breakdown;
    std::size_t window = 0;
    // Online only.
    double w_new = 4.0;
    int online_iters = 1;
    double reg = 0.01;
    double c0 = 512.0;
    double alpha = 0.5;
    std::uint64_t seed = 42;
};

void emit_report(const EvalArgs& a, const EvalReport& report, const std::string& command, json config,
                 std::ostream& out) {
    if (!a.report.empty()) {
        auto file = open_out(a.report);
        write_report_jsonl(file, report);
        close_out(file, a.report);
        write_manifest(a.report + ".manifest.json", command, std::move(config), a.dataset, a.seed);
    }
    if (!a.breakdown.empty()) {
        auto file = open_out(a.breakdown);
        write_breakdown_csv(file, history_breakdown(report));
        close_out(file, a.breakdown);
    }
    if (a.window > 0) {
        out << "window_begin,window_end,hr,ndcg\n";
        for (const auto& w : windowed_means(report, a.window)) {
            out << w.begin << ',' << w.end << ',' << w.hr << ',' << w.ndcg << '\n';
        }
    }
    json agg{{"events", report.events.size()}, {"hr", report.hr},           {"ndcg", report.ndcg},
             {"cutoff", report.cutoff},        {"skipped", report.skipped}};
    out << agg.dump() << '\n';
}

int cmd_eval_offline(const EvalArgs& a, std::ostream& out) {
    const auto data = load_snapshot(a.dataset);
    const auto split = make_split(data, a.split, a.test_fraction);
    const auto model = load_model(a.model);
    check_dimensions(model, split.train);
    const auto report = evaluate_offline(model, split, {a.cutoff, a.exclude_train, a.threads});
    emit_report(a, report, "eval-offline",
                json{{"split", a.split},
                     {"test_fraction", a.test_fraction},
                     {"cutoff", a.cutoff},
                     {"exclude_train", a.exclude_train},
                     {"model_fingerprint", file_fingerprint(a.model)}},
                out);
    return exit_ok;
}

int cmd_eval_online(const EvalArgs& a, std::ostream& out) {
    const auto data = load_snapshot(a.dataset);
    const auto split = split_chronological(data, a.test_fraction);
    auto model = load_model(a.model);
    check_dimensions(model, split.train);
    auto weights = confidence_vector(item_popularity(split.train), a.c0, a.alpha);
    OnlineConfig cfg;
    cfg.w_new = a.w_new;
    cfg.online_iters = a.online_iters;
    cfg.lambda = a.reg;
    cfg.seed = a.seed;
    OnlineUpdater updater(std::move(model), split.train, std::move(weights), cfg);
    const auto report =
        evaluate_online(updater, split.test, {a.cutoff, a.exclude_train, 1}, &split.users, &split.items);
    emit_report(a, report, "eval-online",
                json{{"test_fraction", a.test_fraction},
                     {"cutoff", a.cutoff},
                     {"exclude_train", a.exclude_train},
                     {"w_new", a.w_new},
                     {"online_iters", a.online_iters},
                     {"reg", a.reg},
                     {"c0", a.c0},
                     {"alpha", a.alpha},
                     {"model_fingerprint", file_fingerprint(a.model)}},
                out);
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::vector<std::size_t> factors{32, 64, 128};
    std::vector<std::size_t> synthetic{5000, 5000, 100000};
    std::uint64_t seed = 42;
    int threads = 1;
    double c0 = 512.0;
    double alpha = 0.5;
    double reg = 0.01;
    std::string output;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
    if (a.synthetic.size() != 3) throw InvalidInput("--synthetic takes M N nnz");
    SyntheticConfig syn;
    syn.users = a.synthetic[0];
    syn.items = a.synthetic[1];
    syn.interactions = a.synthetic[2];
    syn.seed = a.seed;
    const auto data = build_dataset(generate_synthetic(syn));
    const auto weights = confidence_vector(item_popularity(data), a.c0, a.alpha);
    const auto uniform = uniform_confidence(data.num_items(), a.c0 / static_cast<double>(data.num_items()));

    std::ostringstream csv;
    csv << "learner,factors,users,items,nnz,seconds\n";
    using clock = std::chrono::steady_clock;
    for (auto k : a.factors) {
        for (const std::string learner : {"eals", "als"}) {
            const bool fast = learner == "eals";
            auto model = init_model(data.num_users(), data.num_items(), k, a.seed);
            prepare_model(model, data, fast ? weights : uniform, a.threads);
            const auto start = clock::now();
            if (fast) {
                sweep(model, data, weights, a.reg, a.threads);
            } else {
                als_sweep(model, data, uniform, a.reg, a.threads);
            }
            const double seconds = std::chrono::duration<double>(clock::now() - start).count();
            csv << learner << ',' << k << ',' << data.num_users() << ',' << data.num_items() << ',' << data.nnz()
                << ',' << seconds << '\n';
        }
    }
    if (a.output.empty()) {
        out << csv.str();
    } else {
        auto file = open_out(a.output);
        file << csv.str();
        close_out(file, a.output);
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    SyntheticConfig config;
    std::string output;
    std::string format = "tsv";
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto raw = generate_synthetic(a.config);
    auto file = open_out(a.output);
    write_interactions(file, raw, parse_text_format(a.format));
    close_out(file, a.output);
    out << "records=" << raw.size() << '\n';
    return exit_ok;
}

}  // namespace

std::string file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize k = 0; k < in.gcount(); ++k) {
            h ^= static_cast<unsigned char>(buf[k]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Element-wise ALS for implicit-feedback matrix factorization"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version);

    PrepareArgs prep;
    auto* prepare = app.add_subcommand("prepare", "Filter a raw log and write a dataset snapshot");
    prepare->add_option("input", prep.input, "Raw user/item/timestamp log")->required();
    prepare->add_option("output", prep.output, "Dataset snapshot to write")->required();
    prepare->add_option("--kcore", prep.kcore, "Minimum interactions per user and item")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    prepare->add_option("--format", prep.format, "tsv or csv")
        ->capture_default_str()
        ->check(CLI::IsMember({"tsv", "csv"}));

    TrainArgs tr;
    auto* train_cmd = app.add_subcommand("train", "Fit a model on a dataset snapshot");
    train_cmd->add_option("dataset", tr.dataset)->required();
    train_cmd->add_option("model_out", tr.model_out)->required();
    train_cmd->add_option("--learner", tr.learner)->capture_default_str()->check(CLI::IsMember({"eals", "als", "bpr"}));
    train_cmd->add_option("--factors", tr.factors)->capture_default_str()->check(CLI::PositiveNumber);
    train_cmd->add_option("--reg", tr.reg, "L2 strength lambda")->capture_default_str();
    train_cmd->add_option("--c0", tr.c0, "Total missing-data weight")->capture_default_str();
    train_cmd->add_option("--alpha", tr.alpha, "Popularity exponent")->capture_default_str();
    train_cmd->add_option("--w0", tr.w0, "ALS uniform missing weight (default c0 / N)");
    train_cmd->add_option("--iters", tr.iters)->capture_default_str();
    train_cmd->add_option("--tol", tr.tol, "Relative objective change to stop at")->capture_default_str();
    train_cmd->add_option("--seed", tr.seed)->capture_default_str()->envname("EALS_SEED");
    train_cmd->add_option("--threads", tr.threads)->capture_default_str()->envname("EALS_THREADS");
    train_cmd->add_option("--split", tr.split, "Train on: loo, chrono or none")
        ->capture_default_str()
        ->check(CLI::IsMember({"loo", "chrono", "none"}));
    train_cmd->add_option("--test-fraction", tr.test_fraction)->capture_default_str();
    train_cmd->add_option("--lr", tr.lr, "BPR learning rate")->capture_default_str();
    train_cmd->add_option("--epochs", tr.epochs, "BPR epochs")->capture_default_str();
    train_cmd->add_option("--weights-out", tr.weights_out, "Write the confidence vector as `i c_i` lines");

    EvalArgs off;
    auto* offline = app.add_subcommand("eval-offline", "Score held-out interactions with a fixed model");
    offline->add_option("model", off.model)->required();
    offline->add_option("dataset", off.dataset)->required();
    offline->add_option("--split", off.split)->capture_default_str()->check(CLI::IsMember({"loo", "chrono"}));
    offline->add_option("--test-fraction", off.test_fraction)->capture_default_str();
    offline->add_option("--cutoff", off.cutoff)->capture_default_str()->check(CLI::PositiveNumber);
    offline->add_flag("--exclude-train", off.exclude_train);
    offline->add_option("--threads", off.threads)->capture_default_str()->envname("EALS_THREADS");
    offline->add_option("--report", off.report, "JSON-lines report path");
    offline->add_option("--breakdown", off.breakdown, "History breakdown CSV path");
    offline->add_option("--window", off.window, "Print windowed means over this many events");

    EvalArgs on;
    auto* online = app.add_subcommand("eval-online", "Replay the chronological test stream with incremental updates");
    online->add_option("model", on.model)->required();
    online->add_option("dataset", on.dataset)->required();
    online->add_option("--test-fraction", on.test_fraction)->capture_default_str();
    online->add_option("--cutoff", on.cutoff)->capture_default_str()->check(CLI::PositiveNumber);
    online->add_flag("--exclude-train", on.exclude_train);
    online->add_option("--w-new", on.w_new)->capture_default_str();
    online->add_option("--online-iters", on.online_iters)->capture_default_str();
    online->add_option("--reg", on.reg)->capture_default_str();
    online->add_option("--c0", on.c0)->capture_default_str();
    online->add_option("--alpha", on.alpha)->capture_default_str();
    online->add_option("--seed", on.seed)->capture_default_str()->envname("EALS_SEED");
    online->add_option("--report", on.report, "JSON-lines report path");
    online->add_option("--breakdown", on.breakdown, "History breakdown CSV path");
    online->add_option("--window", on.window, "Print windowed means over this many events");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Time one eALS and one ALS sweep per factor count");
    bench_cmd->add_option("--factors-list", bench.factors)->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--synthetic", bench.synthetic, "M N nnz")->expected(3)->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed)->capture_default_str()->envname("EALS_SEED");
    bench_cmd->add_option("--threads", bench.threads)->capture_default_str()->envname("EALS_THREADS");
    bench_cmd->add_option("--c0", bench.c0)->capture_default_str();
    bench_cmd->add_option("--alpha", bench.alpha)->capture_default_str();
    bench_cmd->add_option("--out", bench.output, "CSV path (stdout if omitted)");

    SynthArgs syn;
    auto* synth = app.add_subcommand("synth", "Write a synthetic power-law interaction log");
    synth->add_option("output", syn.output)->required();
    synth->add_option("--users", syn.config.users)->capture_default_str();
    synth->add_option("--items", syn.config.items)->capture_default_str();
    synth->add_option("--interactions", syn.config.interactions)->capture_default_str();
    synth->add_option("--clusters", syn.config.clusters)->capture_default_str();
    synth->add_option("--affinity", syn.config.affinity)->capture_default_str();
    synth->add_option("--lifetime", syn.config.item_lifetime, "Mean item lifetime as a fraction of the span; 0 is static")
        ->capture_default_str();
    synth->add_option("--exploration", syn.config.exploration, "Tenure-scaled chance of a popularity-blind pick")
        ->capture_default_str();
    synth->add_option("--seed", syn.config.seed)->capture_default_str()->envname("EALS_SEED");
    synth->add_option("--format", syn.format)->capture_default_str()->check(CLI::IsMember({"tsv", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        out << o.str();
        err << er.str();
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*prepare) return cmd_prepare(prep, out, err);
        if (*train_cmd) return cmd_train(tr, out);
        if (*offline) return cmd_eval_offline(off, out);
        if (*online) return cmd_eval_online(on, out);
        if (*bench_cmd) return cmd_bench(bench, out);
        if (*synth) return cmd_synth(syn, out);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return exit_validation;
    }
    return exit_usage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    std::string name = "eals";
    argv.push_back(name.data());
    std::vector<std::string> copy = args;
    for (auto& s : copy) argv.push_back(s.data());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace eals::cli
