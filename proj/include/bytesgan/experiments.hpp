#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bytesgan/config.hpp"
#include "bytesgan/dataset.hpp"
#include "bytesgan/metrics.hpp"
#include "bytesgan/report.hpp"
#include "bytesgan/training.hpp"

namespace bytesgan {

/// sgan: adversarial training; supervised: the same discriminator trained on
/// the labeled pool alone (same step budget); cnn: the 1-D CNN baseline.
enum class Arm { sgan, supervised, cnn };

std::string to_string(Arm a);

/// One training run of an experiment grid.
struct Cell {
    Arm arm = Arm::sgan;
    std::size_t labeled_per_class = 0;
    /// Unlabeled draw; nullopt takes every remaining sample. For the
    /// supervised arm it only sets the step budget.
    std::optional<std::size_t> unlabeled_per_class;
    std::uint64_t seed = 0;

    std::string name() const;
};

struct CellResult {
    Cell cell;
    EvalReport report;
    TrainLog log;
    std::size_t labeled_size = 0;
    std::size_t unlabeled_size = 0;
    std::size_t test_size = 0;
    bool from_cache = false;

    double accuracy() const { return report.metrics.accuracy; }
};

struct RunnerOptions {
    /// Completed cells are stored here and reused on later runs. Empty disables caching.
    std::filesystem::path cache_dir;
    std::size_t jobs = 1;
    std::function<void(const std::string&)> progress;  ///< may be called from worker threads
    /// Called before a cell trains (not for cache hits).
    std::function<void(const Cell&)> before_train;
};

/// Trains and scores grid cells on one dataset. Splits use the cell seed,
/// so cells sharing (labeled count, seed) train on the same labeled pool.
class ExperimentRunner {
public:
    ExperimentRunner(const TrafficDataset& dataset, const RunConfig& config, RunnerOptions options = {});

    CellResult run(const Cell& cell) const;
    /// Results in grid order whatever the execution order.
    std::vector<CellResult> run(const std::vector<Cell>& cells) const;

    /// Cache directory of a cell: its name plus a digest of everything that
    /// determines the result.
    std::filesystem::path cell_dir(const Cell& cell) const;

private:
    std::optional<CellResult> load_cached(const Cell& cell) const;
    void store(const CellResult& r, const ModelCheckpoint& model) const;

    const TrafficDataset& ds_;
    RunConfig cfg_;
    RunnerOptions opt_;
    std::uint64_t data_digest_;
};

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> v);

struct Spread {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

Spread spread_of(const std::vector<double>& v);

/// Data, grid and training budget of the desk-scale synthetic benchmark
/// (7 classes, 20 labeled per class, 500 and 2000 unlabeled per class, CNN
/// with 4000 labeled per class, seeds 1..5).
RunConfig synthetic_benchmark_config();

std::vector<Cell> experiment_1_cells(const ExperimentGrid& g);
std::vector<Cell> experiment_2_cells(const ExperimentGrid& g);
std::vector<Cell> synthetic_cells(const ExperimentGrid& g);

/// Outcome of a whole experiment and the tables derived from it.
struct ExperimentResult {
    std::string kind;  ///< "exp1", "exp2" or "synthetic"
    std::vector<CellResult> cells;
    std::vector<std::string> class_names;

    /// Accuracies of the matching cells in seed order.
    std::vector<double> accuracies(Arm arm, std::size_t labeled, std::optional<std::size_t> unlabeled) const;

    /// labeled, unlabeled, accuracy (median), accuracy_min, accuracy_max, seeds.
    CsvTable table_v() const;
    /// labeled, sgan_accuracy, cnn_accuracy, gap and spreads.
    CsvTable table_vi() const;
    /// Per seed: supervised accuracy, SGAN accuracy at each unlabeled count, lift.
    CsvTable lift_table() const;
    /// One row per cell.
    CsvTable cells_table() const;
    /// Class by run-group table of one metric ("precision", "recall", "f1"),
    /// averaged over seeds.
    CsvTable per_class_table(const std::string& metric) const;

    /// Writes tables, per-class CSVs, reports, loss curves and summary.json.
    void write(const std::filesystem::path& out_dir) const;
};

ExperimentResult run_experiment_1(const TrafficDataset& ds, const RunConfig& cfg, const RunnerOptions& opt);
ExperimentResult run_experiment_2(const TrafficDataset& ds, const RunConfig& cfg, const RunnerOptions& opt);
/// Builds the synthetic dataset from `cfg.synthetic` and runs the lift,
/// monotonicity and ample-label CNN cells.
ExperimentResult run_synthetic_benchmark(const RunConfig& cfg, const RunnerOptions& opt);

} // namespace bytesgan
