#include "bytesgan/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bytesgan/checkpoint.hpp"
#include "bytesgan/config.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/experiments.hpp"
#include "bytesgan/metrics.hpp"
#include "bytesgan/report.hpp"
#include "bytesgan/synthetic.hpp"
#include "bytesgan/training.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace fs = std::filesystem;

namespace {

RunConfig load_config(const std::string& path) { return path.empty() ? RunConfig{} : RunConfig::load(path); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string split_json(const Splits& s, const SplitSpec& spec) {
    nlohmann::ordered_json j;
    j["labeled_per_class"] = spec.labeled_per_class;
    j["unlabeled_per_class"] = spec.unlabeled_per_class ? nlohmann::ordered_json(*spec.unlabeled_per_class)
                                                        : nlohmann::ordered_json(nullptr);
    j["test_fraction"] = spec.test_fraction;
    j["seed"] = spec.seed;
    j["labeled_ids"] = s.labeled.ids();
    j["unlabeled_ids"] = s.unlabeled.ids();
    j["test_ids"] = s.test.ids();
    return j.dump() + "\n";
}

// ---------------------------------------------------------------- preprocess

struct PreprocessArgs {
    std::string manifest, out, config;
    std::vector<std::string> drop;
    bool keep_addresses = false, keep_non_ip = false, no_transport_header = false, drop_zero_payload = false;
};

void cmd_preprocess(const PreprocessArgs& a, std::ostream& out) {
    FilterPolicy policy = load_config(a.config).filter;
    if (!a.drop.empty()) {
        policy.dropped_protocols.clear();
        for (const auto& name : a.drop) {
            if (name == "none") continue;
            auto p = parse_protocol(name);
            if (!p) throw ConfigError("unknown protocol '" + name + "'");
            policy.dropped_protocols.push_back(*p);
        }
    }
    if (a.keep_addresses) policy.zero_ip_addresses = false;
    if (a.keep_non_ip) policy.drop_non_ip = false;
    if (a.no_transport_header) policy.include_transport_header = false;
    if (a.drop_zero_payload) policy.keep_zero_payload = false;

    const Manifest manifest = Manifest::load(a.manifest);
    const BuildSummary summary = build_dataset(manifest, policy, a.out);
    out << summary_to_json(summary);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string model, dataset, config, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> epochs, steps_per_epoch;
    bool wall_clock = false;
};

void cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = load_config(a.config);
    if (a.seed) {
        cfg.split.seed = *a.seed;
        cfg.sgan.seed = *a.seed;
        cfg.cnn.seed = *a.seed;
    }
    if (a.epochs) cfg.sgan.epochs = cfg.cnn.epochs = *a.epochs;
    if (a.steps_per_epoch) cfg.sgan.steps_per_epoch = cfg.cnn.steps_per_epoch = *a.steps_per_epoch;
    cfg.output_dir = a.out_dir;
    cfg.validate();

    const TrafficDataset ds = load_dataset(a.dataset);
    const Splits splits = make_splits(ds, cfg.split);
    const fs::path dir = a.out_dir;
    ensure_dir(dir / "checkpoints");
    cfg.save(dir / "resolved_config.json");
    write_text_file((dir / "split.json").string(), split_json(splits, cfg.split));

    TrainHooks hooks;
    hooks.eval_pool = &splits.test;
    hooks.checkpoint_dir = dir / "checkpoints";
    hooks.on_step = [&](const StepRecord& s) {
        if (s.step % 50 == 0) err << "step " << s.step << " loss " << format_number(s.loss, 4) << "\n";
    };

    TrainLog log;
    if (a.model == "sgan") {
        SganResult r = train_sgan(splits.labeled, splits.unlabeled, ds.schema(), cfg.sgan, hooks);
        ModelCheckpoint::of(r.discriminator, ds.schema()).save(dir / "discriminator.bsgm");
        ModelCheckpoint::of(r.generator, ds.schema().names()).save(dir / "generator.bsgm");
        log = std::move(r.log);
    } else {
        CnnResult r = train_cnn(splits.labeled, ds.schema(), cfg.cnn, hooks);
        ModelCheckpoint::of(r.params, ds.schema()).save(dir / "cnn.bsgm");
        log = std::move(r.log);
    }
    write_text_file((dir / "train_log.jsonl").string(), log.to_jsonl(a.wall_clock));
    write_text_file((dir / "loss.csv").string(), loss_curve_csv(log));
    write_text_file((dir / "loss.svg").string(), loss_curve_svg(log, a.model + " training loss"));

    nlohmann::ordered_json s;
    s["model"] = a.model;
    s["steps"] = log.steps.size();
    s["labeled"] = splits.labeled.size();
    s["unlabeled"] = a.model == "sgan" ? splits.unlabeled.size() : 0;
    s["test"] = splits.test.size();
    if (!log.epochs.empty() && log.epochs.back().heldout_accuracy) {
        s["heldout_accuracy"] = *log.epochs.back().heldout_accuracy;
    }
    out << s.dump() << "\n";
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string model, dataset, report, config, split = "all";
};

void cmd_eval(const EvalArgs& a, std::ostream& out) {
    const ModelCheckpoint model = ModelCheckpoint::load(a.model);
    if (model.architecture == Architecture::generator) {
        throw ConfigError(a.model + " is a generator checkpoint; evaluate the discriminator or cnn checkpoint");
    }
    const TrafficDataset ds = load_dataset(a.dataset);
    if (model.class_names != ds.schema().names()) {
        throw ConfigError("model classes do not match the classes of " + a.dataset);
    }
    LabeledPool pool;
    std::string basis = "all labeled samples";
    if (a.split == "test") {
        const RunConfig cfg = load_config(a.config);
        pool = make_splits(ds, cfg.split).test;
        basis = "test split, seed " + std::to_string(cfg.split.seed);
    } else {
        pool = LabeledPool::from_dataset(ds);
    }
    if (pool.empty()) throw ConfigError(a.dataset + " holds no labeled samples to evaluate");

    EvalReport r = evaluate(model, pool, ds.schema());
    r.metadata["model"] = fs::path(a.model).filename().string();
    r.metadata["dataset"] = fs::path(a.dataset).filename().string();
    r.metadata["dataset_digest"] = hex64(file_digest(a.dataset));
    r.metadata["pool"] = basis;
    const fs::path report = a.report;
    if (report.has_parent_path()) ensure_dir(report.parent_path());
    r.save(report);
    out << "{\"accuracy\":" << format_number(r.metrics.accuracy) << ",\"samples\":" << r.confusion.total() << "}\n";
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
    std::string model, pcap, out, drops, config;
};

void cmd_classify(const ClassifyArgs& a, std::ostream& out) {
    const ModelCheckpoint model = ModelCheckpoint::load(a.model);
    if (model.architecture == Architecture::generator) {
        throw ConfigError(a.model + " is a generator checkpoint; classify with the discriminator or cnn checkpoint");
    }
    const FilterPolicy policy = load_config(a.config).filter;
    const auto& names = model.class_names;
    const std::size_t n = names.size();

    std::vector<std::uint64_t> ordinals;
    std::vector<float> rows;
    CsvTable dropped;
    dropped.header = {"packet", "reason"};
    PcapReader reader(a.pcap);
    while (auto pkt = reader.next()) {
        const std::uint64_t ordinal = reader.records_read();
        const FilterDecision d = filter_packet(*pkt, policy);
        if (!d.keep) {
            dropped.rows.push_back({std::to_string(ordinal), to_string(d.reason)});
            continue;
        }
        const PbvOctets o = to_pbv_octets(*pkt, policy);
        ordinals.push_back(ordinal);
        for (auto b : o) rows.push_back(normalize_octet(b));
    }

    std::vector<double> probs;
    if (!ordinals.empty()) {
        probs = model.architecture == Architecture::cnn
                    ? class_probabilities(model.cnn(), rows, ordinals.size())
                    : class_probabilities(model.discriminator(), rows, ordinals.size());
    }
    CsvTable pred;
    pred.header = {"packet", "class", "confidence"};
    for (std::size_t i = 0; i < ordinals.size(); ++i) {
        const double* p = probs.data() + i * n;
        const std::size_t best = static_cast<std::size_t>(std::max_element(p, p + n) - p);
        pred.rows.push_back({std::to_string(ordinals[i]), names[best], format_number(p[best])});
    }

    const fs::path out_path = a.out;
    if (out_path.has_parent_path()) ensure_dir(out_path.parent_path());
    const std::string drops = a.drops.empty() ? (out_path.parent_path() / (out_path.stem().string() + "_dropped.csv")).string()
                                              : a.drops;
    write_text_file(out_path.string(), pred.str());
    write_text_file(drops, dropped.str());
    out << "{\"classified\":" << ordinals.size() << ",\"dropped\":" << dropped.rows.size() << "}\n";
}

// ---------------------------------------------------------------- synthesize

struct SynthesizeArgs {
    std::string config, out;
    std::optional<std::size_t> per_class;
    std::optional<std::uint64_t> seed;
};

void cmd_synthesize(const SynthesizeArgs& a, std::ostream& out) {
    SyntheticSpec spec = load_config(a.config).synthetic;
    if (a.per_class) spec.per_class = *a.per_class;
    if (a.seed) spec.seed = *a.seed;
    const TrafficDataset ds = make_synthetic_dataset(spec);
    const fs::path path = a.out;
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    ds.save(path);
    out << "{\"samples\":" << ds.size() << ",\"classes\":" << ds.schema().size() << "}\n";
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
    std::string kind, config, out_dir, dataset;
    std::size_t jobs = 1;
};

void cmd_experiment(const ExperimentArgs& a, std::ostream& out, std::ostream& err) {
    RunConfig cfg = a.config.empty() && a.kind == "synthetic" ? synthetic_benchmark_config() : load_config(a.config);
    cfg.output_dir = a.out_dir;
    const fs::path dir = a.out_dir;
    ensure_dir(dir);

    RunnerOptions opt;
    opt.jobs = a.jobs;
    const char* cache = std::getenv("BYTESGAN_CACHE_DIR");
    opt.cache_dir = cache && *cache ? fs::path(cache) : dir / "cache";
    std::mutex mu;
    opt.progress = [&](const std::string& line) {
        std::lock_guard lock(mu);
        err << line << "\n";
    };
    cfg.save(dir / "resolved_config.json");

    ExperimentResult r;
    if (a.kind == "synthetic") {
        r = run_synthetic_benchmark(cfg, opt);
    } else {
        if (a.dataset.empty()) throw ConfigError(a.kind + " needs --dataset");
        const TrafficDataset ds = load_dataset(a.dataset);
        r = a.kind == "exp1" ? run_experiment_1(ds, cfg, opt) : run_experiment_2(ds, cfg, opt);
    }
    r.write(dir);

    std::size_t cached = 0;
    for (const auto& c : r.cells) cached += c.from_cache;
    out << "{\"experiment\":\"" << a.kind << "\",\"cells\":" << r.cells.size() << ",\"cached\":" << cached << "}\n";
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Packet-byte traffic classification with a semi-supervised GAN"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bytesgan 1.0");

    PreprocessArgs pa;
    auto* pre = app.add_subcommand("preprocess", "Filter captures and build a PBVD dataset");
    pre->add_option("--manifest", pa.manifest, "JSON manifest of captures")->required();
    pre->add_option("--out", pa.out, "Output dataset path")->required();
    pre->add_option("--config", pa.config, "Run config (its filter section is used)");
    pre->add_option("--drop", pa.drop, "Protocols to drop (arp, dhcpv4, dhcpv6, icmpv4, icmpv6, none)")->delimiter(',');
    pre->add_flag("--keep-addresses", pa.keep_addresses, "Do not zero IP addresses");
    pre->add_flag("--keep-non-ip", pa.keep_non_ip, "Keep non-IP frames");
    pre->add_flag("--no-transport-header", pa.no_transport_header, "Cut the TCP/UDP header out of each vector");
    pre->add_flag("--drop-zero-payload", pa.drop_zero_payload, "Drop TCP/UDP segments without payload");

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "Train an SGAN or the CNN baseline");
    train->add_option("model", ta.model, "sgan or cnn")->required()->check(CLI::IsMember({"sgan", "cnn"}));
    train->add_option("--dataset", ta.dataset, "PBVD dataset")->required();
    train->add_option("--config", ta.config, "Run config JSON");
    train->add_option("--out-dir", ta.out_dir, "Output directory")->required();
    train->add_option("--seed", ta.seed, "Overrides the split and training seeds");
    train->add_option("--epochs", ta.epochs, "Overrides the configured epochs");
    train->add_option("--steps-per-epoch", ta.steps_per_epoch, "Overrides the configured steps per epoch");
    train->add_flag("--wall-clock", ta.wall_clock, "Record wall-clock seconds in the train log");

    EvalArgs ea;
    auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
    eval->add_option("--model", ea.model, "Discriminator or CNN checkpoint")->required();
    eval->add_option("--dataset", ea.dataset, "PBVD dataset")->required();
    eval->add_option("--report", ea.report, "Report JSON path")->required();
    eval->add_option("--config", ea.config, "Run config (split section, for --split test)");
    eval->add_option("--split", ea.split, "all: every labeled sample; test: the configured test split")
        ->check(CLI::IsMember({"all", "test"}));

    ClassifyArgs ca;
    auto* cls = app.add_subcommand("classify", "Classify every packet of a capture");
    cls->add_option("--model", ca.model, "Discriminator or CNN checkpoint")->required();
    cls->add_option("--pcap", ca.pcap, "Capture file")->required();
    cls->add_option("--out", ca.out, "Predictions CSV")->required();
    cls->add_option("--drops", ca.drops, "Dropped-packet CSV (default <out>_dropped.csv)");
    cls->add_option("--config", ca.config, "Run config (its filter section is used)");

    SynthesizeArgs sa;
    auto* syn = app.add_subcommand("synthesize", "Write the synthetic benchmark dataset");
    syn->add_option("--config", sa.config, "Run config (its synthetic section is used)");
    syn->add_option("--out", sa.out, "Output dataset path")->required();
    syn->add_option("--per-class", sa.per_class, "Overrides samples per class");
    syn->add_option("--seed", sa.seed, "Overrides the dataset seed");

    ExperimentArgs xa;
    auto* exp = app.add_subcommand("experiment", "Run an experiment grid");
    exp->add_option("kind", xa.kind, "exp1, exp2 or synthetic")
        ->required()
        ->check(CLI::IsMember({"exp1", "exp2", "synthetic"}));
    exp->add_option("--config", xa.config, "Run config JSON (synthetic defaults to the benchmark settings)");
    exp->add_option("--out-dir", xa.out_dir, "Output directory")->required();
    exp->add_option("--dataset", xa.dataset, "PBVD dataset (exp1, exp2)");
    exp->add_option("--jobs", xa.jobs, "Grid cells trained in parallel")->check(CLI::PositiveNumber);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (pre->parsed()) cmd_preprocess(pa, out);
        if (train->parsed()) cmd_train(ta, out, err);
        if (eval->parsed()) cmd_eval(ea, out);
        if (cls->parsed()) cmd_classify(ca, out);
        if (syn->parsed()) cmd_synthesize(sa, out);
        if (exp->parsed()) cmd_experiment(xa, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace bytesgan
