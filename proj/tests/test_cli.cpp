#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bytesgan/cli.hpp"
#include "bytesgan/config.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/experiments.hpp"
#include "bytesgan/pbv.hpp"
#include "bytesgan/synthetic.hpp"
#include "bytesgan/training.hpp"
#include "bytesgan/util.hpp"
#include "packets.hpp"

using namespace bytesgan;
using namespace bytesgan::testing;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    Outcome o;
    o.code = run_cli(args, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

std::uint64_t digest(const fs::path& p) { return file_digest(p.string()); }

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> row;
        std::stringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) row.push_back(field);
        if (!line.empty() && line.back() == ',') row.push_back("");
        rows.push_back(row);
    }
    return rows;
}

// Small nets are not configurable from the CLI, so runs stay short instead.
const char* kFastConfig = R"({
  "split": {"labeled_per_class": 6, "test_fraction": 0.25, "seed": 1},
  "sgan": {"batch_size": 4, "epochs": 2, "steps_per_epoch": 2, "seed": 1},
  "cnn": {"batch_size": 4, "micro_batch": 4, "epochs": 1, "steps_per_epoch": 2, "seed": 1},
  "synthetic": {"n_classes": 3, "per_class": 16, "seed": 5}
})";

struct Workspace {
    fs::path dir;
    fs::path config;
    fs::path dataset;
};

const Workspace& workspace() {
    static const Workspace w = [] {
        Workspace w;
        w.dir = scratch_dir("cli");
        w.config = w.dir / "fast.json";
        spit(w.config, kFastConfig);
        w.dataset = w.dir / "synthetic.pbvd";
        auto o = cli({"synthesize", "--config", w.config.string(), "--out", w.dataset.string()});
        REQUIRE(o.code == 0);
        return w;
    }();
    return w;
}

void write_pcap(const fs::path& p, const std::vector<Bytes>& frames) {
    PcapWriter w(p, 1);
    for (std::size_t i = 0; i < frames.size(); ++i) w.write(frames[i], static_cast<std::uint32_t>(i));
}

} // namespace

TEST_CASE("help and usage errors") {
    CHECK(cli({"--help"}).code == 0);
    CHECK(cli({}).code == 2);
    CHECK(cli({"train"}).code == 2);
    CHECK(cli({"train", "gan", "--dataset", "x", "--out-dir", "y"}).code == 2);
    CHECK(cli({"frobnicate"}).code == 2);
}

TEST_CASE("run config round trip and unknown keys") {
    const auto dir = scratch_dir("cli_config");
    RunConfig c;
    c.sgan.batch_size = 17;
    c.experiment.seeds = {4, 9};
    c.synthetic.random_phase = true;
    c.save(dir / "c.json");
    const RunConfig back = RunConfig::load(dir / "c.json");
    CHECK(back.to_json() == c.to_json());

    // every default is materialized
    const auto j = json::parse(slurp(dir / "c.json"));
    for (const char* k : {"filter", "split", "sgan", "cnn", "experiment", "synthetic", "output_dir"}) {
        CHECK(j.contains(k));
    }
    CHECK(j["sgan"].contains("learning_rate"));
    CHECK(j["cnn"].contains("rho"));

    spit(dir / "bad_top.json", R"({"sgan": {}, "colour": 1})");
    spit(dir / "bad_nested.json", R"({"sgan": {"batchsize": 3}})");
    spit(dir / "bad_value.json", R"({"split": {"test_fraction": 1.5}})");
    spit(dir / "bad_syntax.json", R"({"sgan": )");
    for (const char* f : {"bad_top.json", "bad_nested.json", "bad_value.json"}) {
        CAPTURE(f);
        CHECK_THROWS_AS(RunConfig::load(dir / f), ConfigError);
        const auto o = cli({"synthesize", "--config", (dir / f).string(), "--out", (dir / "x.pbvd").string()});
        CHECK(o.code == 2);
        CHECK(!o.err.empty());
    }
    CHECK(cli({"synthesize", "--config", (dir / "bad_syntax.json").string(), "--out", (dir / "x.pbvd").string()}).code ==
          2);
    CHECK(cli({"synthesize", "--config", (dir / "absent.json").string(), "--out", (dir / "x.pbvd").string()}).code == 3);
}

TEST_CASE("preprocess builds a dataset from a manifest") {
    const auto dir = scratch_dir("cli_preprocess");
    write_pcap(dir / "a.pcap", {tls_frame(100, 1), arp_request(), tls_frame(300, 2), icmp_echo()});
    write_pcap(dir / "b.pcap", {tls_frame(50, 3), tls_frame(60, 4), tls_frame(70, 5)});
    spit(dir / "manifest.json", R"({"classes": ["web", "chat"], "entries": [
        {"path": "a.pcap", "label": "web"}, {"path": "b.pcap", "label": "chat"}]})");

    const auto o = cli({"preprocess", "--manifest", (dir / "manifest.json").string(), "--out", (dir / "d1.pbvd").string()});
    REQUIRE(o.code == 0);
    const auto s = json::parse(o.out);
    CHECK(s["inputs"].size() == 2);
    CHECK(s["total_packets"] == 7);
    CHECK(s["kept"] == 5);
    CHECK(s["dropped"] == 2);
    CHECK(s["per_class"]["web"]["dropped"]["arp"] == 1);
    CHECK(s["per_class"]["web"]["dropped"]["icmpv4"] == 1);

    const auto ds = load_dataset((dir / "d1.pbvd").string());
    CHECK(ds.size() == 5);

    SUBCASE("rerun gives identical bytes") {
        REQUIRE(cli({"preprocess", "--manifest", (dir / "manifest.json").string(), "--out", (dir / "d2.pbvd").string()})
                    .code == 0);
        CHECK(digest(dir / "d1.pbvd") == digest(dir / "d2.pbvd"));
    }
    SUBCASE("policy overrides") {
        const auto k = cli({"preprocess", "--manifest", (dir / "manifest.json").string(), "--out",
                            (dir / "d3.pbvd").string(), "--drop", "arp"});
        REQUIRE(k.code == 0);
        CHECK(json::parse(k.out)["kept"] == 6);
        CHECK(cli({"preprocess", "--manifest", (dir / "manifest.json").string(), "--out", (dir / "d4.pbvd").string(),
                   "--drop", "smtp"})
                  .code == 2);
    }
    SUBCASE("missing capture") {
        spit(dir / "missing.json", R"({"classes": ["web", "chat"], "entries": [{"path": "nowhere.pcap", "label": "web"}]})");
        const auto m = cli({"preprocess", "--manifest", (dir / "missing.json").string(), "--out", (dir / "m.pbvd").string()});
        CHECK_MESSAGE(m.code == 3, m.err);
        CHECK(m.err.find("nowhere.pcap") != std::string::npos);
    }
    SUBCASE("unknown label") {
        spit(dir / "label.json", R"({"classes": ["web", "chat"], "entries": [{"path": "a.pcap", "label": "mail"}]})");
        CHECK(cli({"preprocess", "--manifest", (dir / "label.json").string(), "--out", (dir / "l.pbvd").string()}).code == 2);
    }
}

TEST_CASE("synthesize is deterministic") {
    const auto& w = workspace();
    const auto copy = w.dir / "synthetic_again.pbvd";
    REQUIRE(cli({"synthesize", "--config", w.config.string(), "--out", copy.string()}).code == 0);
    CHECK(digest(copy) == digest(w.dataset));
    const auto ds = load_dataset(w.dataset.string());
    CHECK(ds.size() == 48);
    CHECK(ds.schema().size() == 3);
}

TEST_CASE("train, eval and classify") {
    const auto& w = workspace();
    const auto run_dir = w.dir / "sgan_a";
    const auto o = cli({"train", "sgan", "--dataset", w.dataset.string(), "--config", w.config.string(), "--out-dir",
                        run_dir.string(), "--epochs", "5", "--seed", "3"});
    REQUIRE_MESSAGE(o.code == 0, o.err);
    const auto summary = json::parse(o.out);
    CHECK(summary["steps"] == 10);
    CHECK(summary["labeled"] == 18);

    for (const char* f : {"resolved_config.json", "split.json", "discriminator.bsgm", "generator.bsgm", "train_log.jsonl",
                          "loss.csv", "loss.svg"}) {
        CAPTURE(f);
        CHECK(fs::exists(run_dir / f));
    }
    // resolved config carries the overrides
    const RunConfig resolved = RunConfig::load(run_dir / "resolved_config.json");
    CHECK(resolved.sgan.epochs == 5);
    CHECK(resolved.sgan.seed == 3);
    CHECK(resolved.split.seed == 3);

    // the log parses line by line and as a whole
    std::istringstream lines(slurp(run_dir / "train_log.jsonl"));
    std::string line;
    std::size_t parsed = 0;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        CHECK(json::accept(line));
        ++parsed;
    }
    CHECK(parsed >= 10);
    const TrainLog log = TrainLog::from_jsonl(slurp(run_dir / "train_log.jsonl"));
    CHECK(log.steps.size() == 10);
    CHECK(log.epochs.size() == 5);

    SUBCASE("fixed seed reproduces every artifact") {
        const auto again = w.dir / "sgan_b";
        REQUIRE(cli({"train", "sgan", "--dataset", w.dataset.string(), "--config", w.config.string(), "--out-dir",
                     again.string(), "--epochs", "5", "--seed", "3"})
                    .code == 0);
        for (const char* f : {"discriminator.bsgm", "generator.bsgm", "train_log.jsonl", "split.json", "loss.csv"}) {
            CAPTURE(f);
            CHECK(digest(run_dir / f) == digest(again / f));
        }
    }

    SUBCASE("eval report matches its confusion csv") {
        const auto report = w.dir / "eval" / "report.json";
        const auto e = cli({"eval", "--model", (run_dir / "discriminator.bsgm").string(), "--dataset",
                            w.dataset.string(), "--report", report.string()});
        REQUIRE_MESSAGE(e.code == 0, e.err);
        const auto r = json::parse(slurp(report));
        const double acc = r["accuracy"].get<double>();
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);

        const auto conf = read_csv(w.dir / "eval" / "report_confusion.csv");
        REQUIRE(conf.size() == 4);
        std::uint64_t diag = 0, total = 0;
        for (std::size_t i = 1; i < conf.size(); ++i) {
            REQUIRE(conf[i].size() == 4);
            for (std::size_t j = 1; j < conf[i].size(); ++j) {
                const auto n = std::stoull(conf[i][j]);
                total += n;
                if (j == i) diag += n;
            }
        }
        CHECK(total == 48);
        CHECK(acc == doctest::Approx(static_cast<double>(diag) / static_cast<double>(total)).epsilon(1e-12));
        CHECK(fs::exists(w.dir / "eval" / "report_per_class.csv"));

        const auto t = cli({"eval", "--model", (run_dir / "discriminator.bsgm").string(), "--dataset",
                            w.dataset.string(), "--report", (w.dir / "eval" / "test.json").string(), "--split", "test",
                            "--config", w.config.string()});
        REQUIRE(t.code == 0);
        CHECK(json::parse(t.out)["samples"] == 12);

        // rerun is byte-identical
        REQUIRE(cli({"eval", "--model", (run_dir / "discriminator.bsgm").string(), "--dataset", w.dataset.string(),
                     "--report", (w.dir / "eval" / "again.json").string()})
                    .code == 0);
        CHECK(digest(w.dir / "eval" / "again_confusion.csv") == digest(w.dir / "eval" / "report_confusion.csv"));
    }

    SUBCASE("eval rejects mismatched inputs") {
        const auto other_cfg = w.dir / "four.json";
        spit(other_cfg, R"({"synthetic": {"n_classes": 4, "per_class": 3}})");
        const auto other = w.dir / "four.pbvd";
        REQUIRE(cli({"synthesize", "--config", other_cfg.string(), "--out", other.string()}).code == 0);
        CHECK(cli({"eval", "--model", (run_dir / "discriminator.bsgm").string(), "--dataset", other.string(), "--report",
                   (w.dir / "x.json").string()})
                  .code == 2);
        CHECK(cli({"eval", "--model", (run_dir / "generator.bsgm").string(), "--dataset", w.dataset.string(), "--report",
                   (w.dir / "x.json").string()})
                  .code == 2);
        CHECK(cli({"eval", "--model", (w.dir / "none.bsgm").string(), "--dataset", w.dataset.string(), "--report",
                   (w.dir / "x.json").string()})
                  .code == 3);
        spit(w.dir / "garbage.bsgm", "not a checkpoint");
        CHECK(cli({"eval", "--model", (w.dir / "garbage.bsgm").string(), "--dataset", w.dataset.string(), "--report",
                   (w.dir / "x.json").string()})
                  .code == 3);
    }

    SUBCASE("classify") {
        const auto cdir = w.dir / "classify";
        fs::create_directories(cdir);
        write_pcap(cdir / "arp.pcap", {arp_request(), arp_request(), arp_request()});
        write_pcap(cdir / "mixed.pcap", {tls_frame(100, 1), arp_request(), tls_frame(900, 2), tls_frame(1400, 3)});
        const std::string model = (run_dir / "discriminator.bsgm").string();

        auto a = cli({"classify", "--model", model, "--pcap", (cdir / "arp.pcap").string(), "--out",
                      (cdir / "arp.csv").string()});
        REQUIRE_MESSAGE(a.code == 0, a.err);
        CHECK(read_csv(cdir / "arp.csv").size() == 1);
        const auto drops = read_csv(cdir / "arp_dropped.csv");
        REQUIRE(drops.size() == 4);
        for (std::size_t i = 1; i < drops.size(); ++i) {
            CHECK(drops[i][0] == std::to_string(i));
            CHECK(drops[i][1] == "arp");
        }

        auto m = cli({"classify", "--model", model, "--pcap", (cdir / "mixed.pcap").string(), "--out",
                      (cdir / "mixed.csv").string(), "--drops", (cdir / "mixed_drops.csv").string()});
        REQUIRE(m.code == 0);
        const auto pred = read_csv(cdir / "mixed.csv");
        REQUIRE(pred.size() == 4);
        CHECK(pred[0] == std::vector<std::string>{"packet", "class", "confidence"});
        const std::set<std::string> names{"class0", "class1", "class2"};
        std::vector<std::string> ordinals;
        for (std::size_t i = 1; i < pred.size(); ++i) {
            ordinals.push_back(pred[i][0]);
            CHECK(names.count(pred[i][1]) == 1);
            const double c = std::stod(pred[i][2]);
            CHECK(c >= 1.0 / 3.0 - 1e-6);
            CHECK(c <= 1.0);
        }
        CHECK(ordinals == std::vector<std::string>{"1", "3", "4"});
        CHECK(read_csv(cdir / "mixed_drops.csv").size() == 2);

        REQUIRE(cli({"classify", "--model", model, "--pcap", (cdir / "mixed.pcap").string(), "--out",
                     (cdir / "mixed2.csv").string(), "--drops", (cdir / "mixed_drops2.csv").string()})
                    .code == 0);
        CHECK(digest(cdir / "mixed.csv") == digest(cdir / "mixed2.csv"));
        CHECK(digest(cdir / "mixed_drops.csv") == digest(cdir / "mixed_drops2.csv"));

        CHECK(cli({"classify", "--model", model, "--pcap", (cdir / "none.pcap").string(), "--out",
                   (cdir / "n.csv").string()})
                  .code == 3);
    }
}

TEST_CASE("train errors") {
    const auto& w = workspace();
    CHECK(cli({"train", "sgan", "--dataset", (w.dir / "absent.pbvd").string(), "--out-dir", (w.dir / "e1").string()})
              .code == 3);
    CHECK(cli({"train", "sgan", "--dataset", w.dataset.string(), "--config", w.config.string(), "--out-dir",
               (w.dir / "e2").string(), "--epochs", "0"})
              .code == 2);

    // a learning rate this large overflows on the first steps
    const auto huge = w.dir / "huge.json";
    auto cfg = json::parse(kFastConfig);
    cfg["sgan"]["learning_rate"] = 1e30;
    spit(huge, cfg.dump());
    const auto d = cli({"train", "sgan", "--dataset", w.dataset.string(), "--config", huge.string(), "--out-dir",
                        (w.dir / "e3").string()});
    CHECK(d.code == 4);
}

TEST_CASE("cnn training through the cli") {
    const auto& w = workspace();
    const auto a = w.dir / "cnn_a", b = w.dir / "cnn_b";
    for (const auto& d : {a, b}) {
        const auto o = cli({"train", "cnn", "--dataset", w.dataset.string(), "--config", w.config.string(), "--out-dir",
                            d.string(), "--seed", "2"});
        REQUIRE_MESSAGE(o.code == 0, o.err);
    }
    CHECK(fs::exists(a / "cnn.bsgm"));
    CHECK(digest(a / "cnn.bsgm") == digest(b / "cnn.bsgm"));
    CHECK(digest(a / "train_log.jsonl") == digest(b / "train_log.jsonl"));
    const auto e = cli({"eval", "--model", (a / "cnn.bsgm").string(), "--dataset", w.dataset.string(), "--report",
                        (a / "report.json").string()});
    REQUIRE(e.code == 0);
    const double acc = json::parse(e.out)["accuracy"].get<double>();
    CHECK(acc >= 0.0);
    CHECK(acc <= 1.0);
}

namespace {

std::string grid_config(const std::string& extra) {
    auto j = json::parse(kFastConfig);
    j["sgan"]["epochs"] = 1;
    j["experiment"] = json::parse(extra);
    return j.dump();
}

} // namespace

TEST_CASE("experiment exp2 grid") {
    const auto& w = workspace();
    const auto cfg = w.dir / "exp2.json";
    spit(cfg, grid_config(R"({"labeled_counts": [2, 3], "seeds": [1, 2]})"));
    const auto out = w.dir / "exp2";
    const auto o = cli({"experiment", "exp2", "--config", cfg.string(), "--dataset", w.dataset.string(), "--out-dir",
                        out.string()});
    REQUIRE_MESSAGE(o.code == 0, o.err);
    const auto s = json::parse(o.out);
    CHECK(s["cached"] == 0);

    // 2 counts x 2 seeds, each grid point training the SGAN and the CNN on one labeled pool
    const auto cells = read_csv(out / "cells.csv");
    REQUIRE(cells.size() == 9);
    std::set<std::pair<std::string, std::string>> points;
    std::size_t sgan = 0, cnn = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        points.insert({cells[i][2], cells[i][4]});
        sgan += cells[i][1] == "sgan";
        cnn += cells[i][1] == "cnn";
    }
    CHECK(points.size() == 4);
    CHECK(sgan == 4);
    CHECK(cnn == 4);

    const auto vi = read_csv(out / "table_vi.csv");
    REQUIRE(vi.size() == 3);
    CHECK(vi[0][0] == "labeled");
    CHECK(vi[1][0] == "2");
    CHECK(vi[2][0] == "3");
    CHECK(fs::exists(out / "summary.json"));
    for (const char* m : {"precision.csv", "recall.csv", "f1.csv"}) CHECK(fs::exists(out / m));
    std::size_t svgs = 0;
    for (const auto& e : fs::directory_iterator(out / "curves")) svgs += e.path().extension() == ".svg";
    CHECK(svgs == 8);

    const auto first_cells = digest(out / "cells.csv");

    // parallel cells give the same tables
    const auto par = w.dir / "exp2_par";
    const auto p = cli({"experiment", "exp2", "--config", cfg.string(), "--dataset", w.dataset.string(), "--out-dir",
                        par.string(), "--jobs", "2"});
    REQUIRE(p.code == 0);
    CHECK(json::parse(p.out)["cached"] == 0);
    CHECK(digest(par / "table_vi.csv") == digest(out / "table_vi.csv"));
    CHECK(digest(par / "cells.csv") == first_cells);

    // a rerun reuses every cell
    const auto again = cli({"experiment", "exp2", "--config", cfg.string(), "--dataset", w.dataset.string(),
                            "--out-dir", out.string()});
    REQUIRE(again.code == 0);
    CHECK(json::parse(again.out)["cached"] == 8);
    CHECK(digest(par / "table_vi.csv") == digest(out / "table_vi.csv"));

    CHECK(cli({"experiment", "exp2", "--config", cfg.string(), "--out-dir", (w.dir / "x").string()}).code == 2);
}

TEST_CASE("experiment exp1 writes the unlabeled sweep table") {
    const auto& w = workspace();
    const auto cfg = w.dir / "exp1.json";
    spit(cfg, grid_config(R"({"labeled_per_class": 3, "unlabeled_counts": [2, 4], "seeds": [1]})"));
    const auto out = w.dir / "exp1";
    const auto cache = w.dir / "shared_cache";
    setenv("BYTESGAN_CACHE_DIR", cache.string().c_str(), 1);
    const auto o = cli({"experiment", "exp1", "--config", cfg.string(), "--dataset", w.dataset.string(), "--out-dir",
                        out.string()});
    unsetenv("BYTESGAN_CACHE_DIR");
    REQUIRE_MESSAGE(o.code == 0, o.err);
    CHECK(fs::exists(cache));
    CHECK(!fs::exists(out / "cache"));

    const auto v = read_csv(out / "table_v.csv");
    REQUIRE(v.size() == 3);
    CHECK(std::vector<std::string>(v[0].begin(), v[0].begin() + 3) == std::vector<std::string>{"labeled", "unlabeled", "accuracy"});
    CHECK(v[1][0] == "3");
    CHECK(v[1][1] == "2");
    CHECK(v[2][1] == "4");
    for (std::size_t i = 1; i < v.size(); ++i) {
        const double a = std::stod(v[i][2]);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }
    // the supervised-only arm runs at the largest unlabeled count
    CHECK(fs::exists(out / "reports" / "supervised_L3_U4_s1.json"));
}

TEST_CASE("interrupted grid resumes without retraining finished cells") {
    const auto& w = workspace();
    const auto ds = load_dataset(w.dataset.string());
    RunConfig cfg = RunConfig::load(w.config);
    cfg.sgan.epochs = 1;
    cfg.experiment.labeled_counts = {2};
    cfg.experiment.seeds = {1, 2, 3};
    const auto cells = experiment_2_cells(cfg.experiment);
    REQUIRE(cells.size() == 6);

    RunnerOptions opt;
    opt.cache_dir = scratch_dir("cli_resume");
    std::size_t trained = 0;
    opt.before_train = [&](const Cell&) {
        if (trained == 3) throw std::runtime_error("killed");
        ++trained;
    };
    {
        ExperimentRunner runner(ds, cfg, opt);
        CHECK_THROWS_WITH(runner.run(cells), "killed");
    }
    CHECK(trained == 3);

    std::vector<std::string> retrained;
    opt.before_train = [&](const Cell& c) { retrained.push_back(c.name()); };
    ExperimentRunner runner(ds, cfg, opt);
    const auto results = runner.run(cells);
    REQUIRE(results.size() == 6);
    std::size_t cached = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        CHECK(results[i].cell.name() == cells[i].name());
        cached += results[i].from_cache;
    }
    CHECK(cached == 3);
    CHECK(retrained == std::vector<std::string>{cells[3].name(), cells[4].name(), cells[5].name()});

    // a cached cell reports what a fresh run computes
    RunnerOptions fresh;
    const auto direct = ExperimentRunner(ds, cfg, fresh).run(cells[0]);
    CHECK(direct.report.confusion == results[0].report.confusion);
    CHECK(direct.log.steps.size() == results[0].log.steps.size());
}
