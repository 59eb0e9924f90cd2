#include "bytesgan/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "bytesgan/checkpoint.hpp"
#include "bytesgan/errors.hpp"
#include "bytesgan/report.hpp"
#include "bytesgan/synthetic.hpp"
#include "bytesgan/util.hpp"

namespace bytesgan {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Arm a) {
    switch (a) {
        case Arm::sgan: return "sgan";
        case Arm::supervised: return "supervised";
        case Arm::cnn: return "cnn";
    }
    return "?";
}

namespace {

std::string unlabeled_tag(const std::optional<std::size_t>& u) { return u ? std::to_string(*u) : "all"; }

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Cell group key without the seed.
std::string group_name(const Cell& c) {
    std::string s = to_string(c.arm) + "_L" + std::to_string(c.labeled_per_class);
    if (c.arm != Arm::cnn) s += "_U" + unlabeled_tag(c.unlabeled_per_class);
    return s;
}

} // namespace

std::string Cell::name() const { return group_name(*this) + "_s" + std::to_string(seed); }

// ---------------------------------------------------------------- runner

ExperimentRunner::ExperimentRunner(const TrafficDataset& dataset, const RunConfig& config, RunnerOptions options)
    : ds_(dataset), cfg_(config), opt_(std::move(options)) {
    const auto bytes = dataset.serialize();
    data_digest_ = digest_of<unsigned char>(bytes);
    if (opt_.jobs == 0) opt_.jobs = 1;
}

fs::path ExperimentRunner::cell_dir(const Cell& cell) const {
    const json full = json::parse(cfg_.to_json());
    Fnv1a h;
    h.update(data_digest_);
    h.update(std::string_view(cell.name()));
    h.update(full.at("split").at("test_fraction").get<double>());
    h.update(std::string_view(full.at(cell.arm == Arm::cnn ? "cnn" : "sgan").dump()));
    return opt_.cache_dir / (cell.name() + "_" + hex64(h.digest()).substr(0, 12));
}

std::optional<CellResult> ExperimentRunner::load_cached(const Cell& cell) const {
    if (opt_.cache_dir.empty()) return std::nullopt;
    const fs::path dir = cell_dir(cell);
    if (!fs::exists(dir / "result.json")) return std::nullopt;
    try {
        const json j = json::parse(read_text(dir / "result.json"));
        CellResult r;
        r.cell = cell;
        r.labeled_size = j.at("labeled_size").get<std::size_t>();
        r.unlabeled_size = j.at("unlabeled_size").get<std::size_t>();
        r.test_size = j.at("test_size").get<std::size_t>();
        r.report = EvalReport::from_json(read_text(dir / "report.json"));
        r.log = TrainLog::from_jsonl(read_text(dir / "train_log.jsonl"));
        r.from_cache = true;
        return r;
    } catch (const std::exception&) {
        return std::nullopt;  // incomplete or stale entry: retrain
    }
}

void ExperimentRunner::store(const CellResult& r, const ModelCheckpoint& model) const {
    if (opt_.cache_dir.empty()) return;
    const fs::path dir = cell_dir(r.cell);
    fs::create_directories(dir);
    model.save(dir / "model.bsgm");
    write_text_file((dir / "report.json").string(), r.report.to_json());
    write_text_file((dir / "train_log.jsonl").string(), r.log.to_jsonl());
    json j;
    j["cell"] = r.cell.name();
    j["arm"] = to_string(r.cell.arm);
    j["labeled_per_class"] = r.cell.labeled_per_class;
    j["unlabeled_per_class"] = unlabeled_tag(r.cell.unlabeled_per_class);
    j["seed"] = r.cell.seed;
    j["labeled_size"] = r.labeled_size;
    j["unlabeled_size"] = r.unlabeled_size;
    j["test_size"] = r.test_size;
    j["accuracy"] = r.accuracy();
    // Completion marker, written last.
    const fs::path tmp = dir / "result.json.tmp";
    write_text_file(tmp.string(), j.dump(2) + "\n");
    fs::rename(tmp, dir / "result.json");
}

CellResult ExperimentRunner::run(const Cell& cell) const {
    if (auto hit = load_cached(cell)) {
        if (opt_.progress) opt_.progress(cell.name() + ": cached, accuracy " + format_number(hit->accuracy(), 4));
        return *hit;
    }
    if (opt_.before_train) opt_.before_train(cell);

    SplitSpec spec = cfg_.split;
    spec.labeled_per_class = cell.labeled_per_class;
    spec.unlabeled_per_class = cell.arm == Arm::cnn ? std::optional<std::size_t>(0) : cell.unlabeled_per_class;
    spec.seed = cell.seed;
    Splits splits = make_splits(ds_, spec);
    const auto& schema = ds_.schema();

    CellResult r;
    r.cell = cell;
    r.labeled_size = splits.labeled.size();
    r.test_size = splits.test.size();

    ModelCheckpoint model;
    if (cell.arm == Arm::cnn) {
        CnnTrainConfig c = cfg_.cnn;
        c.seed = cell.seed;
        CnnResult res = train_cnn(splits.labeled, schema, c);
        model = ModelCheckpoint::of(res.params, schema);
        r.log = std::move(res.log);
    } else {
        SganTrainConfig c = cfg_.sgan;
        c.seed = cell.seed;
        UnlabeledPool none;
        const UnlabeledPool* unlabeled = &splits.unlabeled;
        if (cell.arm == Arm::supervised) {
            if (c.steps_per_epoch == 0) {
                const std::size_t larger = std::max(splits.labeled.size(), splits.unlabeled.size());
                c.steps_per_epoch = (larger + c.batch_size - 1) / c.batch_size;
            }
            unlabeled = &none;
        }
        r.unlabeled_size = unlabeled->size();
        SganResult res = train_sgan(splits.labeled, *unlabeled, schema, c);
        model = ModelCheckpoint::of(res.discriminator, schema);
        r.log = std::move(res.log);
    }

    r.report = evaluate(model, splits.test, schema);
    r.report.metadata["arm"] = to_string(cell.arm);
    r.report.metadata["seed"] = std::to_string(cell.seed);
    r.report.metadata["labeled_per_class"] = std::to_string(cell.labeled_per_class);
    r.report.metadata["unlabeled_per_class"] = unlabeled_tag(cell.unlabeled_per_class);
    r.report.metadata["test_fraction"] = format_number(spec.test_fraction);
    r.report.metadata["dataset_digest"] = hex64(data_digest_);
    store(r, model);
    if (opt_.progress) opt_.progress(cell.name() + ": accuracy " + format_number(r.accuracy(), 4));
    return r;
}

std::vector<CellResult> ExperimentRunner::run(const std::vector<Cell>& cells) const {
    std::vector<std::optional<CellResult>> out(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex mu;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            {
                std::lock_guard lock(mu);
                if (failure) return;
            }
            try {
                out[i] = run(cells[i]);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    const std::size_t n = std::min(opt_.jobs, std::max<std::size_t>(cells.size(), 1));
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<CellResult> results;
    results.reserve(cells.size());
    for (auto& r : out) results.push_back(std::move(*r));
    return results;
}

// ---------------------------------------------------------------- statistics

double median(std::vector<double> v) {
    require(!v.empty(), "median of an empty sample");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Spread spread_of(const std::vector<double>& v) {
    Spread s;
    s.n = v.size();
    if (v.empty()) return s;
    s.median = median(v);
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    return s;
}

// ---------------------------------------------------------------- grids

RunConfig synthetic_benchmark_config() {
    RunConfig c;
    c.synthetic.n_classes = 7;
    c.synthetic.per_class = 4300;
    c.synthetic.seed = 3;
    c.synthetic.noise_sd = 8.0;
    c.synthetic.signal = 2.0;
    c.synthetic.motif_length = 74;
    c.synthetic.min_length = 1480;
    c.synthetic.random_phase = true;
    c.synthetic.baseline_spread = 0.0;

    c.split = SplitSpec{20, std::nullopt, 0.05, 1};

    c.sgan.batch_size = 32;
    c.sgan.epochs = 10;
    c.sgan.steps_per_epoch = 50;
    c.sgan.unlabeled_weight = 0.1;

    c.cnn.batch_size = 32;
    c.cnn.rmsprop.learning_rate = 5e-4;
    c.cnn.epochs = 5;
    c.cnn.steps_per_epoch = 50;

    c.experiment.seeds = {1, 2, 3, 4, 5};
    c.experiment.labeled_per_class = 20;
    c.experiment.unlabeled_counts = {500, 2000};
    c.experiment.cnn_labeled_per_class = 4000;
    return c;
}

std::vector<Cell> experiment_1_cells(const ExperimentGrid& g) {
    std::vector<Cell> cells;
    for (std::size_t u : g.unlabeled_counts) {
        for (auto seed : g.seeds) cells.push_back({Arm::sgan, g.labeled_per_class, u, seed});
    }
    if (g.supervised_baseline && !g.unlabeled_counts.empty()) {
        const std::size_t u = *std::max_element(g.unlabeled_counts.begin(), g.unlabeled_counts.end());
        for (auto seed : g.seeds) cells.push_back({Arm::supervised, g.labeled_per_class, u, seed});
    }
    return cells;
}

std::vector<Cell> experiment_2_cells(const ExperimentGrid& g) {
    std::vector<Cell> cells;
    for (std::size_t l : g.labeled_counts) {
        for (auto seed : g.seeds) {
            cells.push_back({Arm::sgan, l, g.exp2_unlabeled_per_class, seed});
            cells.push_back({Arm::cnn, l, std::nullopt, seed});
        }
    }
    return cells;
}

std::vector<Cell> synthetic_cells(const ExperimentGrid& g) {
    std::vector<Cell> cells;
    if (!g.unlabeled_counts.empty()) {
        const std::size_t top = *std::max_element(g.unlabeled_counts.begin(), g.unlabeled_counts.end());
        for (auto seed : g.seeds) {
            cells.push_back({Arm::supervised, g.labeled_per_class, top, seed});
            for (std::size_t u : g.unlabeled_counts) cells.push_back({Arm::sgan, g.labeled_per_class, u, seed});
        }
    }
    if (g.cnn_labeled_per_class > 0 && !g.seeds.empty()) {
        cells.push_back({Arm::cnn, g.cnn_labeled_per_class, std::nullopt, g.seeds.front()});
    }
    return cells;
}

// ---------------------------------------------------------------- tables

std::vector<double> ExperimentResult::accuracies(Arm arm, std::size_t labeled,
                                                 std::optional<std::size_t> unlabeled) const {
    std::vector<double> v;
    for (const auto& r : cells) {
        if (r.cell.arm != arm || r.cell.labeled_per_class != labeled) continue;
        if (arm != Arm::cnn && r.cell.unlabeled_per_class != unlabeled) continue;
        v.push_back(r.accuracy());
    }
    return v;
}

namespace {

/// Distinct (labeled, unlabeled) pairs of one arm in grid order.
std::vector<std::pair<std::size_t, std::optional<std::size_t>>> groups_of(const std::vector<CellResult>& cells,
                                                                        Arm arm) {
    std::vector<std::pair<std::size_t, std::optional<std::size_t>>> out;
    for (const auto& r : cells) {
        if (r.cell.arm != arm) continue;
        std::pair<std::size_t, std::optional<std::size_t>> k{r.cell.labeled_per_class,
                                                             arm == Arm::cnn ? std::nullopt : r.cell.unlabeled_per_class};
        if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
    }
    return out;
}

std::vector<std::uint64_t> seeds_of(const std::vector<CellResult>& cells) {
    std::vector<std::uint64_t> out;
    for (const auto& r : cells) {
        if (std::find(out.begin(), out.end(), r.cell.seed) == out.end()) out.push_back(r.cell.seed);
    }
    return out;
}

std::optional<double> find_accuracy(const std::vector<CellResult>& cells, Arm arm, std::size_t labeled,
                                    std::optional<std::size_t> unlabeled, std::uint64_t seed) {
    for (const auto& r : cells) {
        if (r.cell.arm == arm && r.cell.labeled_per_class == labeled && r.cell.seed == seed &&
            (arm == Arm::cnn || r.cell.unlabeled_per_class == unlabeled)) {
            return r.accuracy();
        }
    }
    return std::nullopt;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

} // namespace

CsvTable ExperimentResult::table_v() const {
    CsvTable t;
    t.header = {"labeled", "unlabeled", "accuracy", "accuracy_min", "accuracy_max", "seeds"};
    for (const auto& [l, u] : groups_of(cells, Arm::sgan)) {
        const Spread s = spread_of(accuracies(Arm::sgan, l, u));
        t.rows.push_back({std::to_string(l), unlabeled_tag(u), format_number(s.median), format_number(s.min),
                          format_number(s.max), std::to_string(s.n)});
    }
    return t;
}

CsvTable ExperimentResult::table_vi() const {
    CsvTable t;
    t.header = {"labeled", "sgan_accuracy", "cnn_accuracy", "gap", "sgan_min", "sgan_max", "cnn_min", "cnn_max", "seeds"};
    for (const auto& [l, u] : groups_of(cells, Arm::sgan)) {
        const auto sg = accuracies(Arm::sgan, l, u);
        const auto cn = accuracies(Arm::cnn, l, std::nullopt);
        if (cn.empty()) continue;
        // Gap is the median of per-seed differences.
        std::vector<double> gaps;
        for (auto seed : seeds_of(cells)) {
            auto a = find_accuracy(cells, Arm::sgan, l, u, seed);
            auto b = find_accuracy(cells, Arm::cnn, l, std::nullopt, seed);
            if (a && b) gaps.push_back(*a - *b);
        }
        const Spread s = spread_of(sg), c = spread_of(cn);
        t.rows.push_back({std::to_string(l), format_number(s.median), format_number(c.median),
                          gaps.empty() ? "" : format_number(median(gaps)), format_number(s.min), format_number(s.max),
                          format_number(c.min), format_number(c.max), std::to_string(std::min(s.n, c.n))});
    }
    return t;
}

CsvTable ExperimentResult::lift_table() const {
    CsvTable t;
    const auto sup = groups_of(cells, Arm::supervised);
    const auto sg = groups_of(cells, Arm::sgan);
    if (sup.empty()) return t;
    const auto [l, u_budget] = sup.front();
    t.header = {"seed", "supervised"};
    for (const auto& [gl, gu] : sg) {
        if (gl == l) t.header.push_back("sgan_U" + unlabeled_tag(gu));
    }
    t.header.push_back("lift");

    std::vector<std::vector<double>> columns(t.header.size() - 1);
    for (auto seed : seeds_of(cells)) {
        const auto base = find_accuracy(cells, Arm::supervised, l, u_budget, seed);
        if (!base) continue;
        std::vector<std::string> row{std::to_string(seed), format_number(*base)};
        columns[0].push_back(*base);
        std::size_t k = 1;
        for (const auto& [gl, gu] : sg) {
            if (gl != l) continue;
            const auto a = find_accuracy(cells, Arm::sgan, gl, gu, seed);
            row.push_back(opt_number(a));
            if (a) columns[k].push_back(*a);
            ++k;
        }
        const auto matched = find_accuracy(cells, Arm::sgan, l, u_budget, seed);
        row.push_back(matched ? format_number(*matched - *base) : "");
        if (matched) columns[k].push_back(*matched - *base);
        t.rows.push_back(row);
    }
    std::vector<std::string> med{"median"};
    for (const auto& c : columns) med.push_back(c.empty() ? "" : format_number(median(c)));
    t.rows.push_back(med);
    return t;
}

CsvTable ExperimentResult::cells_table() const {
    CsvTable t;
    t.header = {"cell", "arm", "labeled", "unlabeled", "seed", "labeled_size", "unlabeled_size", "test_size",
                "accuracy", "macro_f1", "steps", "cached"};
    for (const auto& r : cells) {
        t.rows.push_back({r.cell.name(), to_string(r.cell.arm), std::to_string(r.cell.labeled_per_class),
                          r.cell.arm == Arm::cnn ? "" : unlabeled_tag(r.cell.unlabeled_per_class),
                          std::to_string(r.cell.seed), std::to_string(r.labeled_size),
                          std::to_string(r.unlabeled_size), std::to_string(r.test_size), format_number(r.accuracy()),
                          format_number(r.report.metrics.macro_f1), std::to_string(r.log.steps.size()),
                          r.from_cache ? "yes" : "no"});
    }
    return t;
}

CsvTable ExperimentResult::per_class_table(const std::string& metric) const {
    if (metric != "precision" && metric != "recall" && metric != "f1") {
        throw ConfigError("unknown per-class metric '" + metric + "'");
    }
    std::vector<std::string> groups;
    std::map<std::string, std::vector<const CellResult*>> members;
    for (const auto& r : cells) {
        const std::string g = group_name(r.cell);
        if (!members.count(g)) groups.push_back(g);
        members[g].push_back(&r);
    }
    CsvTable t;
    t.header = {"class"};
    t.header.insert(t.header.end(), groups.begin(), groups.end());
    for (std::size_t c = 0; c < class_names.size(); ++c) {
        std::vector<std::string> row{class_names[c]};
        for (const auto& g : groups) {
            double sum = 0.0;
            for (const CellResult* r : members[g]) {
                const auto& k = r->report.metrics.per_class.at(c);
                sum += metric == "precision" ? k.precision : metric == "recall" ? k.recall : k.f1;
            }
            row.push_back(format_number(sum / static_cast<double>(members[g].size())));
        }
        t.rows.push_back(row);
    }
    return t;
}

void ExperimentResult::write(const fs::path& out_dir) const {
    fs::create_directories(out_dir / "reports");
    fs::create_directories(out_dir / "curves");
    auto put = [&](const std::string& name, const std::string& text) {
        write_text_file((out_dir / name).string(), text);
    };

    put("cells.csv", cells_table().str());
    if (!groups_of(cells, Arm::sgan).empty()) put("table_v.csv", table_v().str());
    const CsvTable vi = table_vi();
    if (!vi.rows.empty()) put("table_vi.csv", vi.str());
    const CsvTable lift = lift_table();
    if (!lift.rows.empty()) put("lift.csv", lift.str());
    for (const char* m : {"precision", "recall", "f1"}) put(std::string(m) + ".csv", per_class_table(m).str());

    for (const auto& r : cells) {
        r.report.save(out_dir / "reports" / (r.cell.name() + ".json"));
        put("curves/" + r.cell.name() + "_loss.csv", loss_curve_csv(r.log));
        put("curves/" + r.cell.name() + "_loss.svg", loss_curve_svg(r.log, r.cell.name()));
    }

    nlohmann::ordered_json s;
    s["kind"] = kind;
    s["cells"] = cells.size();
    auto groups = nlohmann::ordered_json::array();
    for (Arm arm : {Arm::sgan, Arm::supervised, Arm::cnn}) {
        for (const auto& [l, u] : groups_of(cells, arm)) {
            const Spread sp = spread_of(accuracies(arm, l, u));
            nlohmann::ordered_json g;
            g["arm"] = to_string(arm);
            g["labeled_per_class"] = l;
            g["unlabeled_per_class"] = arm == Arm::cnn ? json(nullptr) : json(unlabeled_tag(u));
            g["median_accuracy"] = sp.median;
            g["min_accuracy"] = sp.min;
            g["max_accuracy"] = sp.max;
            g["runs"] = sp.n;
            groups.push_back(g);
        }
    }
    s["groups"] = groups;
    if (!lift.rows.empty() && lift.rows.back().back() != "") s["median_lift"] = std::stod(lift.rows.back().back());
    put("summary.json", s.dump(2) + "\n");
}

// ---------------------------------------------------------------- experiments

namespace {

ExperimentResult run_cells(const std::string& kind, const TrafficDataset& ds, const RunConfig& cfg,
                           const RunnerOptions& opt, const std::vector<Cell>& cells) {
    if (cells.empty()) throw ConfigError(kind + ": the experiment grid is empty");
    ExperimentRunner runner(ds, cfg, opt);
    ExperimentResult r;
    r.kind = kind;
    r.class_names = ds.schema().names();
    r.cells = runner.run(cells);
    return r;
}

} // namespace

ExperimentResult run_experiment_1(const TrafficDataset& ds, const RunConfig& cfg, const RunnerOptions& opt) {
    return run_cells("exp1", ds, cfg, opt, experiment_1_cells(cfg.experiment));
}

ExperimentResult run_experiment_2(const TrafficDataset& ds, const RunConfig& cfg, const RunnerOptions& opt) {
    return run_cells("exp2", ds, cfg, opt, experiment_2_cells(cfg.experiment));
}

ExperimentResult run_synthetic_benchmark(const RunConfig& cfg, const RunnerOptions& opt) {
    const TrafficDataset ds = make_synthetic_dataset(cfg.synthetic);
    return run_cells("synthetic", ds, cfg, opt, synthetic_cells(cfg.experiment));
}

} // namespace bytesgan
