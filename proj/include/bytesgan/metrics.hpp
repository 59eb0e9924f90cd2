#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bytesgan/checkpoint.hpp"
#include "bytesgan/dataset.hpp"

namespace bytesgan {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

    static ConfusionMatrix from_predictions(std::size_t classes, std::span<const int> truth,
                                            std::span<const int> predicted);

    void add(int truth, int predicted, std::uint64_t count = 1);
    std::size_t classes() const { return n_; }
    std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
    std::uint64_t total() const;
    std::uint64_t trace() const;
    std::uint64_t row_sum(std::size_t truth) const;
    std::uint64_t column_sum(std::size_t predicted) const;

    bool operator==(const ConfusionMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;    ///< true samples of the class
    std::uint64_t predicted = 0;  ///< samples predicted as the class
    /// 0/0 cases, reported as 0 and flagged.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct Metrics {
    double accuracy = 0.0;
    double micro_recall = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassMetrics> per_class;
};

Metrics compute_metrics(const ConfusionMatrix& cm);

struct EvalReport {
    std::string model_kind;  ///< "discriminator" or "cnn"
    std::vector<std::string> class_names;
    ConfusionMatrix confusion;
    Metrics metrics;
    std::map<std::string, std::string> metadata;  ///< split spec, fingerprints, seed, paths

    std::string to_json() const;
    /// Inverse of to_json; metrics are recomputed from the confusion counts.
    static EvalReport from_json(std::string_view text);
    std::string per_class_csv() const;
    std::string confusion_csv() const;
    /// Writes the JSON report plus `<stem>_per_class.csv` and `<stem>_confusion.csv` beside it.
    void save(const std::filesystem::path& json_path) const;
};

/// Accuracy recomputed from a confusion CSV written by EvalReport.
double accuracy_from_confusion_csv(std::string_view csv);

/// Predictions from a discriminator or CNN checkpoint.
std::vector<int> predict(const ModelCheckpoint& model, const SamplePool& pool);

/// Scores a checkpoint on a labeled pool. The checkpoint's class names must
/// equal the schema's, otherwise ConfigError.
EvalReport evaluate(const ModelCheckpoint& model, const LabeledPool& test, const ClassSchema& schema);

} // namespace bytesgan
